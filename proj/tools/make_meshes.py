#!/usr/bin/env python3
"""Regenerate the bundled triangle meshes in assets/.

Each domain is sampled with boundary points at spacing h and a hexagonal
lattice inside, triangulated with Delaunay, and trimmed to the domain by
centroid. Boundary flags are topological (endpoints of edges used once).
"""
import argparse
import pathlib

import numpy as np
from scipy.spatial import Delaunay


def hex_lattice(xmin, xmax, ymin, ymax, h):
    dy = h * np.sqrt(3) / 2
    pts = []
    for j, y in enumerate(np.arange(ymin, ymax + dy, dy)):
        off = 0.5 * h if j % 2 else 0.0
        for x in np.arange(xmin + off, xmax + h, h):
            pts.append((x, y))
    return np.array(pts)


def circle(cx, cy, r, h):
    n = max(8, int(round(2 * np.pi * r / h)))
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])


def segment(a, b, h):
    a, b = np.asarray(a, float), np.asarray(b, float)
    n = max(1, int(round(np.linalg.norm(b - a) / h)))
    t = np.linspace(0, 1, n, endpoint=False)[:, None]
    return a + t * (b - a)


def naca_half_thickness(x, t=0.12):
    return 5 * t * (0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x**2 + 0.2843 * x**3 - 0.1036 * x**4)


def airfoil(h, chord=1.0, x0=-0.5):
    n = max(12, int(round(chord / h)))
    beta = np.linspace(0, np.pi, n + 1)
    xs = 0.5 * (1 - np.cos(beta))
    upper = np.column_stack([xs, naca_half_thickness(xs)])
    lower = np.column_stack([xs[::-1][1:-1], -naca_half_thickness(xs[::-1][1:-1])])
    pts = np.vstack([upper, lower]) * chord
    pts[:, 0] += x0
    return pts


def in_airfoil(p, chord=1.0, x0=-0.5):
    x = (p[:, 0] - x0) / chord
    inside = (x > 0) & (x < 1)
    xc = np.clip(x, 0, 1)
    return inside & (np.abs(p[:, 1]) < naca_half_thickness(xc) * chord)


def domain(name, h):
    if name == "disk":
        bnd = circle(0, 0, 1, h)
        lat = hex_lattice(-1, 1, -1, 1, h)
        lat = lat[np.hypot(lat[:, 0], lat[:, 1]) < 1 - 0.5 * h]
        inside = lambda p: np.hypot(p[:, 0], p[:, 1]) < 1
        return np.vstack([bnd, lat]), inside
    if name == "plate_hole":
        r = 0.3
        corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
        bnd = np.vstack([segment(corners[i], corners[(i + 1) % 4], h) for i in range(4)] + [circle(0, 0, r, h)])
        lat = hex_lattice(-1, 1, -1, 1, h)
        keep = (np.abs(lat[:, 0]) < 1 - 0.5 * h) & (np.abs(lat[:, 1]) < 1 - 0.5 * h)
        keep &= np.hypot(lat[:, 0], lat[:, 1]) > r + 0.5 * h
        inside = lambda p: (np.hypot(p[:, 0], p[:, 1]) > r) & (np.abs(p[:, 0]) < 1) & (np.abs(p[:, 1]) < 1)
        return np.vstack([bnd, lat[keep]]), inside
    if name == "airfoil":
        foil = airfoil(h / 2)
        bnd = np.vstack([circle(0, 0, 1, h), foil])
        lat = hex_lattice(-1, 1, -1, 1, h)
        keep = np.hypot(lat[:, 0], lat[:, 1]) < 1 - 0.5 * h
        d = np.min(np.hypot(lat[:, None, 0] - foil[None, :, 0], lat[:, None, 1] - foil[None, :, 1]), axis=1)
        keep &= (d > 0.5 * h) & ~in_airfoil(lat)
        inside = lambda p: (np.hypot(p[:, 0], p[:, 1]) < 1) & ~in_airfoil(p)
        return np.vstack([bnd, lat[keep]]), inside
    raise ValueError(name)


def build(name, h):
    pts, inside = domain(name, h)
    tri = Delaunay(pts).simplices
    cent = pts[tri].mean(axis=1)
    tri = tri[inside(cent)]
    a = pts[tri]
    area = 0.5 * ((a[:, 1, 0] - a[:, 0, 0]) * (a[:, 2, 1] - a[:, 0, 1]) - (a[:, 2, 0] - a[:, 0, 0]) * (a[:, 1, 1] - a[:, 0, 1]))
    tri = tri[np.abs(area) > 1e-10]
    area = area[np.abs(area) > 1e-10]
    tri[area < 0] = tri[area < 0][:, [0, 2, 1]]
    used = np.unique(tri)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    pts, tri = pts[used], remap[tri]
    edges = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    uniq, count = np.unique(edges, axis=0, return_counts=True)
    flag = np.zeros(len(pts), dtype=int)
    flag[uniq[count == 1].ravel()] = 1
    return pts, tri, flag


def write(path, pts, tri, flag, length):
    with open(path, "w") as f:
        f.write(f"mesh v1 L={length}\n{len(pts)} {len(tri)}\n")
        for (x, y), b in zip(pts, flag):
            f.write(f"{x:.17g} {y:.17g} {b}\n")
        for t in tri:
            f.write(f"{t[0]} {t[1]} {t[2]}\n")


# Base spacing per domain, tuned for roughly 100 interior nodes.
BASE_H = {"disk": 0.17, "plate_hole": 0.19, "airfoil": 0.16}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "assets"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, h0 in BASE_H.items():
        for r in range(3):
            pts, tri, flag = build(name, h0 / 2**r)
            suffix = "" if r == 0 else f".r{r}"
            write(out / f"{name}{suffix}.mesh", pts, tri, flag, 2.0)
            print(f"{name}{suffix}: nodes={len(pts)} interior={int((flag == 0).sum())} triangles={len(tri)}")


if __name__ == "__main__":
    main()
