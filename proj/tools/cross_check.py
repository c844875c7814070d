# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The vrsplit authors
"""Solve a dumped cone program with an independent solver.

Reads the text dump produced by ConeProgram::write_text and solves it with
cvxpy/SCS, printing the optimal objective. Used to cross-check the bundled
interior-point backend on regression fixtures:

    vrsplit-dump-file | python3 tools/cross_check.py
    python3 tools/cross_check.py program.txt
"""
import sys

import cvxpy as cp
import numpy as np


def parse_expr(tokens, x):
    const = float(tokens[0])
    expr = const
    for tok in tokens[1:]:
        var, coef = tok.split(":")
        expr = expr + float(coef) * x[int(var)]
    return expr


def main():
    stream = open(sys.argv[1]) if len(sys.argv) > 1 else sys.stdin
    lines = [ln.rstrip("\n") for ln in stream if ln.strip()]
    assert lines[0] == "vrsplit-coneprogram v1", "unrecognized dump header"
    nvars = int(lines[1].split()[1])
    sense = lines[2].split()[1]
    x = cp.Variable(nvars)
    objective = parse_expr(lines[3].split()[1:], x)

    constraints = []
    i = 4
    while i < len(lines):
        kind, nrows = lines[i].split()
        nrows = int(nrows)
        rows = [parse_expr(lines[i + 1 + r].split(), x) for r in range(nrows)]
        i += 1 + nrows
        if kind == "zero":
            constraints += [r == 0 for r in rows]
        elif kind == "nonneg":
            constraints += [r >= 0 for r in rows]
        elif kind == "soc":
            constraints.append(cp.SOC(rows[0], cp.hstack(rows[1:])))
        elif kind == "rsoc":
            # 2 p q >= ||v||^2, p, q >= 0  ->  ||(p - q, sqrt(2) v)|| <= p + q
            stacked = cp.hstack([rows[0] - rows[1]] +
                                [np.sqrt(2.0) * r for r in rows[2:]])
            constraints.append(cp.SOC(rows[0] + rows[1], stacked))
        elif kind == "exp":
            constraints.append(cp.constraints.ExpCone(rows[0], rows[1], rows[2]))
        else:
            raise ValueError(f"unknown cone kind {kind}")

    prob = cp.Problem(
        cp.Maximize(objective) if sense == "max" else cp.Minimize(objective),
        constraints)
    prob.solve(solver=cp.SCS, eps_abs=1e-10, eps_rel=1e-10, max_iters=1000000)
    print(f"status: {prob.status}")
    print(f"objective: {prob.value:.12e}")


if __name__ == "__main__":
    main()
