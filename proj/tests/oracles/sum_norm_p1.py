"""Sum norm at p = 1 via conic programming.

min_u ||(sum u_k* u_k)^{1/2}||_1 + ||(sum r_k r_k*)^{1/2}||_1, r = x - u.
The column part is the nuclear norm of the vertical stack, the row part
the nuclear norm of the horizontal stack.
"""
import cvxpy as cp
import numpy as np

FAMILIES = {
    "diag_pair": [np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [0.0, 1.0]])],
    "units": [np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])],
    "mixed": [np.array([[1.0, 2.0], [0.0, -1.0]]), np.array([[0.5, 0.0], [1.0, 1.0]]),
              np.array([[0.0, -1.0], [2.0, 0.0]])],
    "first_column": [np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])],
}


def sum_norm(xs):
    us = [cp.Variable(x.shape) for x in xs]
    col = cp.normNuc(cp.vstack(us))
    row = cp.normNuc(cp.hstack([x - u for x, u in zip(xs, us)]))
    prob = cp.Problem(cp.Minimize(col + row))
    prob.solve(solver=cp.SCS, eps=1e-10, max_iters=200000)
    return prob.value


if __name__ == "__main__":
    for name, xs in FAMILIES.items():
        print(f"{name} = {sum_norm(xs):.10f}")
