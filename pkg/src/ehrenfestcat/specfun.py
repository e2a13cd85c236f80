"""Special functions for the chain and jump-diffusion closed forms.

Everything here backs at least one closed-form law of the library: the
beta function, terminating Gauss 2F1 and Appell F1 sums (a non-positive
integer numerator parameter makes them finite polynomials, the only
regime the closed forms ever need), the confluent Kummer functions of
the first and second kind, the parabolic cylinder function D_p for
non-positive order, and thin wrappers over libm's lgamma/erf.

Finite sums are accumulated with Kahan compensation because several of
them alternate.  D_p switches between the Kummer-series formula (small
and negative arguments) and a positive-integrand integral representation
(large positive arguments); the switch point is guarded by a
branch-agreement invariant exercised in the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.special import gammasgn, loggamma, rgamma


class NonConvergenceError(RuntimeError):
    """A truncated series or iteration failed to reach its tolerance."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the infinite series (Kummer Phi, density series)."""

    rel_tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_SERIES = SeriesControl()

#: switch point between the Kummer-series formula and the integral
#: representation of D_p.  For z > 0 the two series terms nearly cancel
#: (about z**2/2 / ln(10) digits lost, worse for very negative orders),
#: while the integral representation has a positive integrand and is
#: accurate for every z > 0; the series is kept only where it is safe.
DP_Z_SWITCH = 1.0


def _kahan(terms):
    """Compensated sum of an iterable of floats."""
    total = 0.0
    carry = 0.0
    for t in terms:
        y = t - carry
        tmp = total + y
        carry = (tmp - total) - y
        total = tmp
    return total


def ln_gamma(x):
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise ValueError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta_fn(x, y):
    """Beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y), in log space."""
    if x <= 0.0 or y <= 0.0:
        raise ValueError(f"beta_fn requires positive arguments, got ({x}, {y})")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def rising_factorial(a, n):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1), with (a)_0 = 1."""
    if n < 0 or n != int(n):
        raise ValueError(f"rising_factorial requires a non-negative integer n, got {n}")
    out = 1.0
    for k in range(int(n)):
        out *= a + k
    return out


def _as_nonpositive_int(b, name):
    m = round(b)
    if abs(b - m) > 1e-9 or m > 0:
        raise ValueError(f"{name} must be a non-positive integer, got {b}")
    return int(m)


def gauss_2f1_terminating(a, b, c, z):
    """Gauss 2F1(a, b; c; z) for non-positive integer b.

    The series terminates after 1 - b terms, so the result is a polynomial
    in z valid for every real z.  c may not be a non-positive integer
    reached before termination (that would divide by zero).
    """
    m = -_as_nonpositive_int(b, "b")
    cr = round(c)
    if abs(c - cr) < 1e-12 and cr <= 0 and -cr < m:
        raise ValueError(f"c={c} hits a pole before the series terminates (b={b})")
    terms = []
    t = 1.0
    for k in range(m + 1):
        terms.append(t)
        if k < m:
            t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
    return _kahan(terms)


def appell_f1_terminating(a, b, c, d, x, y):
    """Appell F1(a; b, c; d; x, y) for non-positive integers b and c.

    Evaluates the finite double sum

        sum_{m=0}^{-b} sum_{n=0}^{-c} (a)_{m+n} (b)_m (c)_n / (d)_{m+n}
                                      * x^m y^n / (m! n!),

    which terminates in both indices and is therefore valid for all real
    x, y (the series definition's |x|,|y| < 1 restriction does not apply).
    """
    mb = -_as_nonpositive_int(b, "b")
    nc = -_as_nonpositive_int(c, "c")
    dr = round(d)
    if abs(d - dr) < 1e-12 and dr <= 0 and -dr < mb + nc:
        raise ValueError(f"d={d} hits a pole before the double sum terminates")
    terms = []
    row = 1.0  # (a)_m (b)_m / (d)_m x^m / m!  at current m, n = 0
    for m in range(mb + 1):
        t = row
        for n in range(nc + 1):
            terms.append(t)
            if n < nc:
                t *= (a + m + n) * (c + n) / ((d + m + n) * (n + 1)) * y
        if m < mb:
            row *= (a + m) * (b + m) / ((d + m) * (m + 1)) * x
    return _kahan(terms)


def kummer_phi(a, c, x, ctl=DEFAULT_SERIES):
    """Kummer confluent function Phi(a, c; x) = 1F1(a; c; x).

    Truncates once |term| < rel_tol * |partial sum|.  Negative real
    arguments go through the Kummer transformation
    Phi(a,c;x) = e^x Phi(c-a, c; -x), whose series has positive terms and
    so avoids the cancellation of the alternating direct series.  The
    parameter a may be complex (the parabolic cylinder evaluation for
    Laplace inversion needs that); c and x are real.
    """
    cr = round(c)
    if abs(c - cr) < 1e-12 and cr <= 0:
        raise ValueError(f"kummer_phi requires c not a non-positive integer, got c={c}")
    if isinstance(x, complex):
        raise ValueError("kummer_phi supports complex a, not complex x")
    if x < 0.0:
        return _phi_series(c - a, c, -x, ctl) * math.exp(x)
    return _phi_series(a, c, x, ctl)


def _phi_series(a, c, x, ctl):
    term = 1.0 + 0.0j if isinstance(a, complex) else 1.0
    total = term
    carry = 0.0 * term
    for n in range(ctl.max_terms):
        term = term * (a + n) / (c + n) * x / (n + 1)
        y = term - carry
        tmp = total + y
        carry = (tmp - total) - y
        total = tmp
        if abs(term) < ctl.rel_tol * abs(total):
            return total
    raise NonConvergenceError(
        f"kummer_phi did not converge within {ctl.max_terms} terms (a={a}, c={c}, x={x})"
    )


#: beyond this argument the two-Phi combination for Psi cancels too hard
#: (about x / ln(10) digits lost) and the integral representation takes over
PSI_X_SWITCH = 10.0


def kummer_psi(a, b, x, ctl=DEFAULT_SERIES):
    """Kummer function of the second kind Psi(a, b; x) for x > 0, b not integer.

    For x <= PSI_X_SWITCH uses the two-Phi combination

        Psi(a,b;x) = Gamma(1-b)/Gamma(a-b+1) Phi(a,b;x)
                   + Gamma(b-1)/Gamma(a) x^{1-b} Phi(a-b+1, 2-b; x);

    beyond that the two terms cancel to about x/ln(10) digits, so the
    positive-integrand representation
    (1/Gamma(a)) int_0^inf e^{-xt} t^{a-1} (1+t)^{b-a-1} dt (a > 0) is
    integrated instead.  The logarithmic (integer b) case never occurs in
    this library and is not implemented.
    """
    if x <= 0.0:
        raise ValueError(f"kummer_psi requires x > 0, got {x}")
    if abs(b - round(b)) < 1e-12:
        raise ValueError(f"kummer_psi is not implemented for integer b, got {b}")
    if x > PSI_X_SWITCH:
        if not a > 0.0:
            raise ValueError(f"the large-x branch of kummer_psi needs a > 0, got a={a}")
        return _psi_integral(a, b, x)
    # both coefficients in log space with explicit signs, the gammas can be huge
    s1 = gammasgn(1.0 - b) * gammasgn(a - b + 1.0)
    l1 = math.lgamma(1.0 - b) - math.lgamma(a - b + 1.0)
    s2 = gammasgn(b - 1.0) * gammasgn(a)
    l2 = math.lgamma(b - 1.0) - math.lgamma(a) + (1.0 - b) * math.log(x)
    t1 = s1 * math.exp(l1) * kummer_phi(a, b, x, ctl)
    t2 = s2 * math.exp(l2) * kummer_phi(a - b + 1.0, 2.0 - b, x, ctl)
    return t1 + t2


def _psi_integral(a, b, x):
    if a == 1.0 and abs((0.5 - b) - round(0.5 - b)) < 1e-12 and round(0.5 - b) >= 0:
        return kummer_psi_a1(round(0.5 - b), x)

    def tail(t):
        return t ** (a - 1.0) * math.exp(-x * t) * (1.0 + t) ** (b - a - 1.0)

    if a < 1.0:
        # remove the t^{a-1} endpoint singularity on [0,1] via v = t^a
        def head(v):
            t = v ** (1.0 / a)
            return math.exp(-x * t) * (1.0 + t) ** (b - a - 1.0)

        i1, _ = quad(head, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
        i1 /= a
    else:
        i1, _ = quad(tail, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    i2, _ = quad(tail, 1.0, math.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return rgamma(a) * (i1 + i2)


#: below this argument the incomplete-gamma continued fraction for the
#: Psi(1, 1/2-k; x) family converges too slowly at small k; the upward
#: recurrence seeded by the two-Phi value is contractive there instead
PSI_A1_CF_SWITCH = 8.0


def kummer_psi_a1(b_offset, x):
    """Psi(1, 1/2 - k; x) for integer k = b_offset >= 0 and x > 0.

    Specialised evaluation used by the jump-diffusion density series,
    where k runs into the thousands and the two-Phi formula would
    overflow.  Two stable routes, both based on Psi(1, 1/2-k; x) =
    e^x x^{k+1/2} Gamma(-k-1/2, x):

    * x <= PSI_A1_CF_SWITCH: the incomplete-gamma recursion
      U_{k+1} = (1 - x U_k)/(k + 3/2), seeded by the two-Phi value at
      k = 0 (upward errors shrink by x/(k+3/2), so the seed's accuracy
      is only dented while k < x);
    * larger x: the classical continued fraction, which collapses to
      U_k = 1/(x + k + 3/2 - 1*(k+3/2)/(x + k + 7/2 - 2*(k+5/2)/...))
      and converges in a few dozen iterations once x or k is sizable.
    """
    if x <= 0.0:
        raise ValueError(f"kummer_psi_a1 requires x > 0, got {x}")
    k = int(b_offset)
    if k < 0:
        raise ValueError(f"kummer_psi_a1 requires k >= 0, got {b_offset}")
    if x <= PSI_A1_CF_SWITCH:
        u = kummer_psi(1.0, 0.5, x)
        for i in range(k):
            u = (1.0 - x * u) / (i + 1.5)
        return u
    return _psi_a1_cf(k, x)


def _psi_a1_cf(k, x):
    # modified Lentz on  b0 + a1/(b1 + a2/(b2 + ...)) with
    # b_j = x + k + 3/2 + 2j,  a_j = -j*(k + 1/2 + j)
    tiny = 1e-300
    b0 = x + k + 1.5
    f = b0 if b0 != 0.0 else tiny
    c = f
    d = 0.0
    for j in range(1, 500):
        aj = -j * (k + 0.5 + j)
        bj = x + k + 1.5 + 2 * j
        d = bj + aj * d
        if d == 0.0:
            d = tiny
        c = bj + aj / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-15:
            return 1.0 / f
    raise NonConvergenceError(f"continued fraction for Psi(1,1/2-{k};{x}) stalled")


def psi_a1_stream(x):
    """Generator of Psi(1, 1/2 - k; x) for k = 0, 1, 2, ... (O(1) per term)."""
    if x <= PSI_A1_CF_SWITCH:
        u = kummer_psi(1.0, 0.5, x)
        k = 0
        while True:
            yield u
            u = (1.0 - x * u) / (k + 1.5)
            k += 1
    else:
        k = 0
        while True:
            yield _psi_a1_cf(k, x)
            k += 1


def parabolic_cylinder_D(p, z):
    """Parabolic cylinder function D_p(z) for p <= 0.

    |z| <= DP_Z_SWITCH (and every z < 0) uses the Kummer-series formula

        D_p(z) = 2^{p/2} e^{-z^2/4} [ sqrt(pi)/Gamma((1-p)/2) Phi(-p/2, 1/2; z^2/2)
                 - sqrt(2 pi) z / Gamma(-p/2) Phi((1-p)/2, 3/2; z^2/2) ],

    which is cancellation-free for z <= 0.  For z > DP_Z_SWITCH the two
    series terms nearly cancel, so the positive-integrand representation

        D_p(z) = e^{-z^2/4} / Gamma(-p) * int_0^inf t^{-p-1} e^{-t^2/2 - z t} dt

    (valid for p < 0) is integrated adaptively instead.
    """
    if p > 0.0:
        raise ValueError(f"parabolic_cylinder_D requires p <= 0, got p={p}")
    if z < 0.0 and z * z / 2.0 > 700.0:
        raise ValueError(f"D_p overflows double precision for z={z}; need z > -37.4")
    if z <= DP_Z_SWITCH:
        return _dp_series(p, z)
    return _dp_integral(p, z)


def _dp_series(p, z):
    """Kummer-series formula for D_p with real order p and real z."""
    x = z * z / 2.0
    t1 = math.sqrt(math.pi) * rgamma((1.0 - p) / 2.0) * kummer_phi(-p / 2.0, 0.5, x)
    t2 = math.sqrt(2.0 * math.pi) * z * rgamma(-p / 2.0) * kummer_phi((1.0 - p) / 2.0, 1.5, x)
    return math.exp(p * (0.5 * math.log(2.0)) - x / 2.0) * (t1 - t2)


def _dp_integral(p, z):
    """Integral-representation branch of D_p, for p < 0 and large positive z."""
    if p == 0.0:
        return math.exp(-z * z / 4.0)
    q = -p  # q > 0

    # [0, 1]: substitute v = t^q so the endpoint singularity t^{q-1} integrates exactly
    def inner(v):
        t = v ** (1.0 / q)
        return math.exp(-t * t / 2.0 - z * t)

    i1, _ = quad(inner, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    i1 /= q

    def outer(t):
        return t ** (q - 1.0) * math.exp(-t * t / 2.0 - z * t)

    i2, _ = quad(outer, 1.0, math.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return math.exp(-z * z / 4.0) * rgamma(q) * (i1 + i2)


#: admissible |z| for the complex-order evaluation.  The series loses about
#: z**2/2 / ln(10) digits for positive z, which still leaves ~10 good digits
#: at the boundary -- plenty for contour inversion at 1e-5 targets.
DP_COMPLEX_ZMAX = 5.0


def parabolic_cylinder_D_complex(p, z):
    """D_p(z) for complex order p and real z, via the Kummer-series formula.

    Used to evaluate Laplace-domain formulas on a Talbot contour; the
    integral branch is real-only, so callers must keep |z| within the
    series domain (|z| <= DP_COMPLEX_ZMAX).
    """
    return cmath.exp(parabolic_cylinder_D_complex_log(p, z))


def parabolic_cylinder_D_complex_log(p, z):
    """log D_p(z) for complex order p and real z.

    The two series terms are kept in log form and recombined with a
    complex log-difference, because on a Talbot contour the gamma
    factors make each term overflow long before the balanced product
    does.
    """
    if abs(z) > DP_COMPLEX_ZMAX:
        raise ValueError(
            f"complex-order D_p is restricted to |z| <= {DP_COMPLEX_ZMAX}, got z={z}"
        )
    p = complex(p)
    x = z * z / 2.0
    base = p * (0.5 * math.log(2.0)) - x / 2.0
    la = 0.5 * math.log(math.pi) - loggamma((1.0 - p) / 2.0) \
        + cmath.log(kummer_phi(-p / 2.0, 0.5, x))
    if z == 0.0:
        return base + la
    lb = 0.5 * math.log(2.0 * math.pi) + cmath.log(complex(z)) - loggamma(-p / 2.0) \
        + cmath.log(kummer_phi((1.0 - p) / 2.0, 1.5, x))
    diff = lb - la
    if diff.real > 0.0:
        bracket = cmath.exp(la - lb) - 1.0
        lead = lb
    else:
        bracket = 1.0 - cmath.exp(diff)
        lead = la
    if bracket == 0.0:
        # the two series terms cancelled to the last bit: p sits on a
        # complex zero of D.  Floor the magnitude; callers running the
        # Talbot agreement check will flag any resulting damage.
        return base + lead + complex(-745.0, 0.0)
    return base + lead + cmath.log(bracket)


def erf(x):
    """Error function, |error| <= 1e-12 (libm)."""
    return math.erf(x)
