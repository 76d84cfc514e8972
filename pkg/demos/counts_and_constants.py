"""Exact counts and limiting constants for the three families."""

from __future__ import annotations

from splitlimit import FAMILIES, count_graphs, count_trees
from splitlimit.asymptotics import solve_constants


def main() -> None:
    for f in FAMILIES:
        trees = [count_trees(f, n) for n in range(1, 9)]
        graphs = [count_graphs(f, n + 1) for n in range(2, 9)]
        c = solve_constants(f)
        print(f"{f}: trees {trees}")
        print(f"{' ' * len(f)}  graphs (n>=2) {graphs}")
        print(f"{' ' * len(f)}  rho={c.rho:.6f} gamma_H={c.gamma_H:.6f} c_f={c.c_f:.6f}")


if __name__ == "__main__":
    main()
