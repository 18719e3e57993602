"""Independent reference implementations used only by the tests.

These deliberately avoid the package's index arithmetic and generators:
systems are plain dicts keyed by bit tuples and every property is evaluated
straight from its definition.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product


def tuples(n):
    return list(product((0, 1), repeat=n))


def as_dict(system):
    """``{(u, v, x, y): p}`` with bit tuples, read via the public cell accessor."""
    n = system.n
    out = {}
    for u, v, x, y in product(tuples(n), repeat=4):
        out[u, v, x, y] = system.cell(list(u), list(v), list(x), list(y))
    return out


def product_box(eps, n):
    """Noisy PR boxes multiplied box by box."""
    eps = Fraction(eps)
    single = {}
    for u, v, x, y in product((0, 1), repeat=4):
        single[u, v, x, y] = (1 - eps) / 2 if (x ^ y) == (u & v) else eps / 2
    table = {}
    for u, v, x, y in product(tuples(n), repeat=4):
        p = Fraction(1)
        for i in range(n):
            p *= single[u[i], v[i], x[i], y[i]]
        table[u, v, x, y] = p
    return table


def interface_marginal(table, n, keep):
    """Marginal over the kept interfaces for every full input.

    Interfaces are numbered 0..2n-1: Alice's boxes then Bob's.  Returns
    ``{inputs: {kept outputs: prob}}``.
    """
    result = {}
    for u, v in product(tuples(n), repeat=2):
        dist = {}
        for x, y in product(tuples(n), repeat=2):
            outs = x + y
            key = tuple(outs[k] for k in keep)
            dist[key] = dist.get(key, 0) + table[u, v, x, y]
        result[u + v] = dist
    return result


def fully_non_signalling(table, n):
    """Every subset's marginal is independent of the inputs outside it."""
    m = 2 * n
    for size in range(1, m):
        for keep in combinations(range(m), size):
            marg = interface_marginal(table, n, keep)
            seen = {}
            for inputs, dist in marg.items():
                key = tuple(inputs[k] for k in keep)
                if key in seen and seen[key] != dist:
                    return False
                seen.setdefault(key, dist)
    return True


def alice_bob_non_signalling(table, n):
    alice, bob = range(n), range(n, 2 * n)
    for keep in (tuple(alice), tuple(bob)):
        marg = interface_marginal(table, n, keep)
        seen = {}
        for inputs, dist in marg.items():
            key = tuple(inputs[k] for k in keep)
            if key in seen and seen[key] != dist:
                return False
            seen.setdefault(key, dist)
    return True


def _independent(table, n, keep, ignore):
    """The marginal on ``keep`` does not change when only inputs in ``ignore`` change."""
    marg = interface_marginal(table, n, keep)
    seen = {}
    for inputs, dist in marg.items():
        key = tuple(b for k, b in enumerate(inputs) if k not in ignore)
        if key in seen and seen[key] != dist:
            return False
        seen.setdefault(key, dist)
    return True


def backward_non_signalling(table, n):
    """For every cut, each side's earlier boxes ignore that side's later inputs."""
    for i in range(2, n + 1):
        early = list(range(i - 1))
        late = list(range(i - 1, n))
        for offset in (0, n):
            keep = tuple(k + offset for k in early) + tuple(k + (n - offset) for k in range(n))
            if not _independent(table, n, keep, {k + offset for k in late}):
                return False
    return True


def almost_backward_non_signalling(table, n):
    """Both parties' earlier boxes jointly ignore both parties' later inputs."""
    for i in range(2, n + 1):
        early = list(range(i - 1))
        late = list(range(i - 1, n))
        keep = tuple(early) + tuple(k + n for k in early)
        if not _independent(table, n, keep, set(late) | {k + n for k in late}):
            return False
    return True


def pairwise_box_non_signalling(table, n):
    """Summing box i's two outputs removes any dependence on u_i and on v_i."""
    m = 2 * n
    for i in range(n):
        keep = tuple(k for k in range(m) if k not in (i, i + n))
        if not _independent(table, n, keep, {i}) or not _independent(table, n, keep, {i + n}):
            return False
    return True


def distance_from_uniform(partition, f, u, v, n):
    """``(1/2) sum_{k,z} |P(K=k, Z=z) - P(Z=z)/2|`` at one input pair, from the joint law."""
    total = Fraction(0)
    for weight, table in partition:
        pk = [Fraction(0), Fraction(0)]
        for x, y in product(tuples(n), repeat=2):
            pk[f(x)] += weight * table[u, v, x, y]
        pz = pk[0] + pk[1]
        total += abs(pk[0] - pz / 2) + abs(pk[1] - pz / 2)
    return total / 2


def c_eps_float(eps):
    eps = float(eps)
    return (-1 + (1 + 64 * eps * eps) ** 0.5) / (32 * eps)


def rank(rows):
    """Rank over the rationals by plain Gaussian elimination on dense lists."""
    mat = [[Fraction(c) for c in r] for r in rows]
    r = 0
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                k = mat[i][c] / mat[r][c]
                mat[i] = [a - k * b for a, b in zip(mat[i], mat[r])]
        r += 1
    return r


def lp_brute_force(objective, equalities, rhs, lower, upper, sense="max"):
    """Optimum of a tiny LP by enumerating every basic solution.

    Each variable is either pinned to a bound or left free; the free ones are
    solved from the equalities when that system has a unique solution.
    """
    nvars = len(lower)
    best = None
    for choice in product((0, 1, 2), repeat=nvars):
        fixed = {j: (lower[j] if c == 0 else upper[j]) for j, c in enumerate(choice) if c < 2}
        free = [j for j in range(nvars) if choice[j] == 2]
        rows = []
        for eq, b in zip(equalities, rhs):
            rest = Fraction(b) - sum(Fraction(eq[j]) * fixed[j] for j in fixed)
            rows.append([Fraction(eq[j]) for j in free] + [rest])
        if free and rank([r[:-1] for r in rows]) != len(free):
            continue
        sol = _solve_unique(rows, len(free)) if free else []
        x = [Fraction(0)] * nvars
        for j, val in fixed.items():
            x[j] = Fraction(val)
        for j, val in zip(free, sol):
            x[j] = val
        if any(not lower[j] <= x[j] <= upper[j] for j in range(nvars)):
            continue
        if any(sum(Fraction(eq[j]) * x[j] for j in range(nvars)) != b for eq, b in zip(equalities, rhs)):
            continue
        value = sum(Fraction(objective[j]) * x[j] for j in range(nvars))
        if best is None or (value > best if sense == "max" else value < best):
            best = value
    return best


def _solve_unique(rows, k):
    mat = [list(r) for r in rows]
    r = 0
    where = []
    for c in range(k):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        mat[r] = [a / mat[r][c] for a in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        where.append(c)
        r += 1
    sol = [Fraction(0)] * k
    for row_i, c in enumerate(where):
        sol[c] = mat[row_i][-1]
    return sol
