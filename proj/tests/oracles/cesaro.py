"""Cesaro averages of a projection E: S_m = Ex + (x - Ex)/(m+1), so
sqrt(m) D_m = -(x - Ex)/(sqrt(m)(m+1)) and the square function equals
||x - Ex||_p (sum_{m<=M} 1/(m(m+1)^2))^{1/2}."""
from fractions import Fraction
import math

if __name__ == "__main__":
    for M in (1, 5, 20):
        s = sum(Fraction(1, m * (m + 1) ** 2) for m in range(1, M + 1))
        print(f"M={M} factor^2 = {s} factor = {math.sqrt(s):.17g}")
