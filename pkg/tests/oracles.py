"""Independent reference computations used to freeze expected values.

Nothing here imports the package under test.
"""

from fractions import Fraction


def exact_weighted_fit(points):
    """Exact rational least squares for T(N) = a + b/N + c*N with weights 1/T.

    ``points`` are (n, t) pairs; t is converted exactly with Fraction(float).
    Returns (a, b, c) as Fractions. With exactly three points this is the
    plain 3x3 interpolation solve.
    """
    rows, rhs = [], []
    for n, t in points:
        n, t = Fraction(n), Fraction(t)
        rows.append([1 / t, 1 / (n * t), n / t])
        rhs.append(Fraction(1))
    m = [[sum(r[i] * r[j] for r in rows) for j in range(3)] for i in range(3)]
    v = [sum(r[i] * y for r, y in zip(rows, rhs)) for i in range(3)]
    return _gauss(m, v)


def _gauss(m, v):
    k = len(v)
    a = [row[:] + [v[i]] for i, row in enumerate(m)]
    for i in range(k):
        p = next(r for r in range(i, k) if a[r][i] != 0)
        a[i], a[p] = a[p], a[i]
        for r in range(k):
            if r != i and a[r][i] != 0:
                f = a[r][i] / a[i][i]
                a[r] = [x - f * y for x, y in zip(a[r], a[i])]
    return [a[i][k] / a[i][i] for i in range(k)]


def brute_force_argmax(f, lo, hi):
    best_n, best = lo, f(lo)
    for n in range(lo + 1, hi + 1):
        val = f(n)
        if val > best:
            best_n, best = n, val
    return best_n


def brute_force_max_qubits(total_ram_bytes, buffer_factor, bytes_per_amplitude=16):
    n = 0
    while buffer_factor * 2 ** (n + 1) * bytes_per_amplitude <= total_ram_bytes:
        n += 1
    return n
