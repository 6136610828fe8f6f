"""Asymptotic constants of additive functionals on random patricia tries.

For the fringe-count toll (indicator of subtrees holding exactly k keys)
everything has closed or rapidly convergent forms.  Writing rho(s) =
sum_a p_a^s and q_k = 1 - rho(k):

    mean profile      f_E(t)  = q_k t^k e^{-t} / k!
    Mellin transform  f_E*(s) = q_k Gamma(k+s) / k!,   f_E*(-1) = q_k/(k(k-1))
    variance profile  f_V*(s) = q_k Gamma(k+s)/k!
                                - (q_k/k!)^2 sum*_a p_a^k Gamma(s+2k) (1+p_a)^(-s-2k)

where sum*_a runs over every finite string once plus every nonempty string
a second time.  The string sum is grouped by character counts (strings of
equal composition share p_a) and truncated with a rigorous geometric tail
bound which is carried as the result's error bound.

With the source entropy H and the lattice period d_p of {log p_a}, the
limit mean and variance of the functional per key are H^-1 psi_E(log n)
and the sigma^2 expressions below; for d_p = 0 the psi_X collapse to the
constants f_X*(-1), for d_p > 0 they are d_p-periodic Fourier series with
coefficients f_X*(-1 - 2 pi i m / d_p).

The independence-number pipeline computes the essential-node probabilities
alpha_n by recursion (binary symmetric source) and turns their partial
sums into a rigorous enclosure of the limiting essential-node ratio.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy import integrate

from .errors import Aperiodic, NonConvergent, PoleAt
from .source import SourceDistribution
from .trees import shape_probability

# ---------------------------------------------------------------------------
# complex Gamma (Lanczos, g = 7, 9 coefficients; reflection below Re z = 1/2)

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(z: complex) -> complex:
    """Gamma(z) for complex z, accurate to ~1e-13 relative on Re z in [-1, 30]."""
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleAt(z)
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * lanczos_gamma(1.0 - z))
    z -= 1.0
    x = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def _near_nonpositive_integer(z: complex, eps: float = 1e-12) -> bool:
    return abs(z.imag) < eps and z.real < 0.5 and abs(z.real - round(z.real)) < eps


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class AsymptoticConstant:
    """A numeric constant plus a rigorous bound on its truncation/quadrature error."""

    value: complex
    error_bound: float
    method: str  # closed-form | truncated-series | quadrature | recursion-bounded

    def __post_init__(self):
        if not math.isfinite(self.error_bound) or self.error_bound < 0:
            raise ValueError("error_bound must be finite and nonnegative")
        if self.method == "closed-form" and self.error_bound != 0.0:
            raise ValueError("closed-form constants carry error_bound 0")

    @property
    def real(self) -> float:
        return float(np.real(self.value))


@dataclass(frozen=True)
class FourierSeries:
    """Truncated Fourier series of a real d_p-periodic limit function.

    Stores c_m for 0 <= m <= truncation; c_{-m} = conj(c_m) is implied.
    """

    period: float
    coeffs: tuple[complex, ...]

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, t: float) -> complex:
        total = complex(self.coeffs[0])
        for m in range(1, len(self.coeffs)):
            phase = cmath.exp(2j * cmath.pi * m * t / self.period)
            total += self.coeffs[m] * phase + self.coeffs[m].conjugate() / phase
        return total


def psi_eval(series, t: float) -> float:
    """Evaluate a limit function psi_X at t: a constant, or its Fourier series.

    The result must be real (coefficients of a real function come in
    conjugate pairs); a residual imaginary part above 1e-12 is a bug.
    """
    if isinstance(series, AsymptoticConstant):
        series = series.value
    if isinstance(series, (int, float, complex)):
        value = complex(series)
    else:
        value = series.eval(t)
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ValueError(f"psi evaluation has imaginary residue {value.imag}")
    return value.real


# ---------------------------------------------------------------------------
# mean constants for the k-key fringe count


def fe_lambda(d: SourceDistribution, k: int, lam: float) -> float:
    """Poissonized mean profile of the k-fringe toll: (1-rho(k)) lam^k e^-lam / k!."""
    if lam == 0.0:
        return 0.0
    # log-space product: lam^k alone overflows long before e^-lam rescues it
    return (1.0 - d.rho(k)) * math.exp(k * math.log(lam) - lam) / math.factorial(k)


def fe_k_star(d: SourceDistribution, k: int, s: complex):
    """Mellin transform of the k-fringe mean profile: (1-rho(k)) Gamma(k+s) / k!.

    At s = -1 this is (1-rho(k))/(k(k-1)).  Raises PoleAt when k+s hits a
    nonpositive integer.
    """
    if k < 2:
        raise ValueError("fringe-count constants require k >= 2")
    z = complex(k) + complex(s)
    if _near_nonpositive_integer(z):
        raise PoleAt(s)
    value = (1.0 - d.rho(k)) * lanczos_gamma(z) / math.factorial(k)
    if isinstance(s, complex) and s.imag != 0:
        return value
    return value.real


# ---------------------------------------------------------------------------
# the starred string sum sum*_a g(p_a)


def _per_length_sum(d: SourceDistribution, length: int, g) -> complex:
    """sum over strings of a given length of g(p_alpha), grouped by composition."""
    probs = d.probs
    m = len(probs)
    if length == 0:
        return g(1.0)
    if all(p == probs[0] for p in probs):
        return (m**length) * g(probs[0] ** length)
    if m == 2:
        p0, p1 = probs
        total = 0.0
        for j in range(length + 1):
            total += float(math.comb(length, j)) * g(p0**j * p1 ** (length - j))
        return total
    total = 0.0
    fact_len = math.factorial(length)
    for combo in combinations_with_replacement(range(m), length):
        counts = [0] * m
        for c in combo:
            counts[c] += 1
        ways = fact_len
        for c in counts:
            ways //= math.factorial(c)
        total += float(ways) * g(math.prod(p**c for p, c in zip(probs, counts)))
    return total


def star_sum(d: SourceDistribution, k: int, g, bound_coeff: float, tol: float):
    """sum*_alpha g(p_alpha): every finite string once, every nonempty string twice.

    Requires |g(p)| <= bound_coeff * p^k on (0,1]; lengths are added until the
    geometric tail bound 2 * bound_coeff * rho(k)^L / (1-rho(k)) drops below
    tol.  Returns (value, tail_bound).
    """
    rho_k = d.rho(k)
    total = _per_length_sum(d, 0, g)
    length = 1
    while True:
        tail = 2.0 * bound_coeff * rho_k**length / (1.0 - rho_k)
        if tail <= tol or length > 100_000:
            return total, tail
        total += 2.0 * _per_length_sum(d, length, g)
        length += 1


# ---------------------------------------------------------------------------
# variance constants for the k-key fringe count


def fv_lambda(d: SourceDistribution, k: int, lam: float, tol: float = 1e-12) -> AsymptoticConstant:
    """Poissonized variance profile f_V(lam) of the k-fringe toll.

    f_V(lam) = q_k lam^k e^-lam / k!
               - sum*_a (q_k/k!)^2 lam^(2k) p_a^k e^(-lam(1+p_a)),  q_k = 1-rho(k).
    """
    if lam == 0.0:
        return AsymptoticConstant(0.0, 0.0, "truncated-series")
    q = 1.0 - d.rho(k)
    coeff = (q / math.factorial(k)) ** 2
    log_lam = math.log(lam)
    head = q * math.exp(k * log_lam - lam) / math.factorial(k)
    bound = math.exp(2 * k * log_lam - lam)

    def g(p):
        return p**k * math.exp(2 * k * log_lam - lam * (1.0 + p))

    series, tail = star_sum(d, k, g, bound, tol / max(coeff, 1e-300))
    return AsymptoticConstant(head - coeff * series, coeff * tail, "truncated-series")


def fv_k_star(d: SourceDistribution, k: int, s: complex = -1, tol: float = 1e-12) -> AsymptoticConstant:
    """Mellin transform of the k-fringe variance profile, with tail bound.

    f_V*(s) = q_k Gamma(k+s)/k!
              - (q_k/k!)^2 sum*_a p_a^k Gamma(s+2k) (1+p_a)^(-s-2k).

    The primary use is s = -1, where the first term is q_k/(k(k-1)) and the
    Gamma factor of the sum is (2k-2)!.  The convergence strip of the
    transform is Re(s) > -k.
    """
    if k < 2:
        raise ValueError("fringe-count constants require k >= 2")
    s = complex(s)
    if s.real <= -k:
        raise NonConvergent(f"f_V* converges for Re(s) > {-k}, got {s}")
    q = 1.0 - d.rho(k)
    fact_k = math.factorial(k)
    head = q * lanczos_gamma(s + k) / fact_k
    gamma2k = lanczos_gamma(s + 2 * k)
    coeff = (q / fact_k) ** 2

    def g(p):
        return p**k * gamma2k * (1.0 + p) ** (-s - 2 * k)

    series, tail = star_sum(d, k, g, abs(gamma2k), tol / max(coeff, 1e-300))
    value = head - coeff * series
    if s.imag == 0:
        value = value.real
    return AsymptoticConstant(value, coeff * tail, "truncated-series")


# ---------------------------------------------------------------------------
# oscillation Fourier coefficients


def fourier_coefficient(d: SourceDistribution, k: int, X: str, m: int, tol: float = 1e-12) -> complex:
    """m-th Fourier coefficient of psi_X for the k-fringe toll: f_X*(-1 - 2 pi m i / d_p)."""
    d_p = d.periodicity()
    if d_p == 0.0:
        raise Aperiodic("the source has no oscillation period")
    s = complex(-1.0, -2.0 * math.pi * m / d_p)
    if X == "E":
        return complex(fe_k_star(d, k, s))
    if X == "V":
        return complex(fv_k_star(d, k, s, tol).value)
    raise ValueError(f"X must be 'E' or 'V', got {X!r}")


def fc_k_star(d: SourceDistribution, k: int, m: int = 0):
    """m-th Fourier coefficient of psi_C = psi_E + psi_E'.

    Differentiating the series multiplies c_m^E by 2 pi i m / d_p, so
    c_m^C = c_m^E (1 + 2 pi i m / d_p); the aperiodic case (constant psi_E,
    zero derivative) and the m = 0 coefficient are both just f_E*(-1).
    """
    d_p = d.periodicity()
    if d_p == 0.0 or m == 0:
        return fe_k_star(d, k, -1)
    return fourier_coefficient(d, k, "E", m) * (1.0 + 2j * math.pi * m / d_p)


def fourier_series(d: SourceDistribution, k: int, X: str, M: int = 8, tol: float = 1e-12) -> FourierSeries:
    """Truncated Fourier series of psi_X (X in {E, V, C}) for the k-fringe toll."""
    d_p = d.periodicity()
    if d_p == 0.0:
        raise Aperiodic("the source has no oscillation period")
    if X == "C":
        coeffs = tuple(fc_k_star(d, k, m) if m else complex(fe_k_star(d, k, -1)) for m in range(M + 1))
    else:
        coeffs = tuple(fourier_coefficient(d, k, X, m, tol) for m in range(M + 1))
    return FourierSeries(period=d_p, coeffs=coeffs)


def psi_for_k(d: SourceDistribution, k: int, X: str, M: int = 8, tol: float = 1e-12):
    """psi_X for the k-fringe toll: a constant when d_p = 0, else a Fourier series."""
    if d.periodicity() == 0.0:
        if X == "V":
            return complex(fv_k_star(d, k, -1, tol).value)
        return complex(fe_k_star(d, k, -1))
    return fourier_series(d, k, X, M, tol)


# ---------------------------------------------------------------------------
# limit variances


@dataclass(frozen=True)
class SigmaConstants:
    """Limit variances of the k-fringe count, Poissonized and fixed-n.

    sigma2_hat scales Phi(poissonized)/sqrt(lam), sigma2 scales
    Phi(fixed n)/sqrt(n).  For a periodic source both oscillate; ``at``
    evaluates them at t = log lam respectively t = log n, and the *_mean
    fields carry the zero-frequency (average) values.
    """

    chi: float
    entropy: float
    d_p: float
    fv_star: AsymptoticConstant
    fc_star: complex
    psi_v: object
    psi_c: object
    sigma2_hat_mean: float
    sigma2_mean: float

    def at(self, t: float) -> tuple[float, float]:
        h = self.entropy
        psi_v = psi_eval(self.psi_v, t)
        psi_c = psi_eval(self.psi_c, t)
        sigma2_hat = self.chi**2 + psi_v / h
        sigma2 = psi_v / h - (psi_c / h) ** 2 - 2.0 * self.chi * psi_c / h
        return sigma2_hat, sigma2


def sigma_constants(d: SourceDistribution, k: int, M: int = 8, tol: float = 1e-12) -> SigmaConstants:
    """Limit variance constants for the k-fringe count (k >= 2, so chi = 0).

    sigma2_hat = chi^2 + H^-1 f_V*(-1)
    sigma2     = H^-1 f_V*(-1) - H^-2 f_C*(-1)^2 - 2 chi H^-1 f_C*(-1)

    with the psi-based periodic versions evaluated by ``at`` when d_p > 0.
    """
    if k < 2:
        raise ValueError("closed-form sigma constants exist for the k-fringe tolls, k >= 2")
    chi = 0.0
    h = d.entropy()
    d_p = d.periodicity()
    fv = fv_k_star(d, k, -1, tol)
    fc = complex(fc_k_star(d, k, 0))
    if d_p == 0.0:
        psi_v, psi_c = complex(fv.value), fc
    else:
        psi_v = fourier_series(d, k, "V", M, tol)
        psi_c = fourier_series(d, k, "C", M, tol)
    s2h = chi**2 + float(np.real(fv.value)) / h
    s2 = float(np.real(fv.value)) / h - (fc.real / h) ** 2 - 2.0 * chi * fc.real / h
    return SigmaConstants(
        chi=chi,
        entropy=h,
        d_p=d_p,
        fv_star=fv,
        fc_star=fc,
        psi_v=psi_v,
        psi_c=psi_c,
        sigma2_hat_mean=s2h,
        sigma2_mean=s2,
    )


def link_trie_patricia(mean_p: float, var_p: float, k: int, d: SourceDistribution) -> tuple[float, float]:
    """Map k-fringe mean/variance on patricia tries to the trie built from the same keys.

    Each patricia fringe of size k stands for a geometric number of trie
    fringes (one per merged prefix character, plus itself), whence

        mean_t = mean_p / (1 - rho(k))
        var_t  = rho(k)/(1-rho(k))^2 * mean_p + var_p/(1-rho(k))^2.
    """
    if k < 2:
        raise ValueError("the link is defined for k >= 2")
    q = 1.0 - d.rho(k)
    return mean_p / q, d.rho(k) / q**2 * mean_p + var_p / q**2


# ---------------------------------------------------------------------------
# fringe-tree distribution limits


def fringe_limit(d: SourceDistribution, k: int) -> float:
    """Limit proportion of fringe trees with k keys: (1-rho(k)) / ((J+H) k (k-1)).

    J is the coentropy; for binary alphabets J = H and the proportion is
    (1-rho(k)) / (2H k(k-1)).
    """
    if k < 2:
        raise ValueError("the fringe distribution limit is defined for k >= 2")
    h, j = d.entropy(), d.coentropy()
    return (1.0 - d.rho(k)) / ((j + h) * k * (k - 1))


def fringe_mass_sum(d: SourceDistribution, kmax: int) -> AsymptoticConstant:
    """sum_{k>=2} (1-rho(k))/(k(k-1)), truncating only the exponentially small part.

    The rho-free part telescopes to exactly 1, so the value is computed as
    1 - sum_{k=2}^{kmax} rho(k)/(k(k-1)) with the remaining rho tail bounded
    by sum_a p_a^(kmax+1)/(1-p_a) / (kmax(kmax+1)).  The result equals the
    coentropy J up to the error bound.
    """
    if kmax < 2:
        raise ValueError("kmax must be >= 2")
    acc = 0.0
    for k in range(2, kmax + 1):
        r = d.rho(k)
        if r == 0.0:
            break
        acc += r / (k * (k - 1))
    tail = sum(p ** (kmax + 1) / (1.0 - p) for p in d.probs) / (kmax * (kmax + 1))
    return AsymptoticConstant(1.0 - acc, tail, "truncated-series")


def shape_limit(d: SourceDistribution, shape) -> float:
    """Per-key limit of the count of fringe trees equal to a fixed shape.

    The k-fringe mean limit splits over shapes proportionally to the exact
    shape law: P(shape) * (1-rho(k)) / (H k(k-1)).
    """
    root = shape.root if hasattr(shape, "root") else shape
    k = root.leaf_count
    if k < 2:
        raise ValueError("shape limits are defined for shapes with k >= 2 leaves")
    prob = shape_probability(shape, d)
    return prob * (1.0 - d.rho(k)) / (d.entropy() * k * (k - 1))


# ---------------------------------------------------------------------------
# numeric Mellin transform (quadrature oracle)


def mellin_numeric(f, s: complex, decay_zero: float, decay_inf="exp", rel_tol: float = 1e-9) -> AsymptoticConstant:
    """Numeric Mellin transform int_0^inf t^(s-1) f(t) dt by adaptive quadrature.

    The caller declares f's behavior: |f(t)| = O(t^decay_zero) as t -> 0 and
    either exponential decay (decay_inf='exp') or O(t^-decay_inf) at
    infinity.  Raises NonConvergent when those rule out absolute
    convergence.  Integration runs in u = log t, split at t = 1, which
    turns the t^(i Im s) oscillation into a fixed frequency.
    """
    s = complex(s)
    if s.real + decay_zero <= 0:
        raise NonConvergent(f"integral diverges at 0: Re(s)={s.real}, decay {decay_zero}")
    if decay_inf != "exp" and float(decay_inf) <= s.real:
        raise NonConvergent(f"integral diverges at infinity: Re(s)={s.real}, decay {decay_inf}")

    def integrand(u):
        # past float range the declared decay makes the integrand vanish
        if abs(u) > 700.0:
            return 0.0j
        # combine the exponents before exponentiating: t^(s-1) alone can
        # overflow where the product with the decaying f is still tiny
        ft = f(math.exp(u))
        if ft == 0.0:
            return 0.0j
        return cmath.exp(s * u + math.log(abs(ft))) * (1.0 if ft > 0 else -1.0)

    def quad_c(a, b):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, re_err = integrate.quad(lambda u: integrand(u).real, a, b, epsabs=1e-14, epsrel=rel_tol, limit=400)
            im, im_err = integrate.quad(lambda u: integrand(u).imag, a, b, epsabs=1e-14, epsrel=rel_tol, limit=400)
        return complex(re, im), re_err + im_err

    low, low_err = quad_c(-np.inf, 0.0)
    high, high_err = quad_c(0.0, np.inf)
    return AsymptoticConstant(low + high, low_err + high_err, "quadrature")


# ---------------------------------------------------------------------------
# independence number (binary symmetric source)


def indnum_alphas(N: int) -> np.ndarray:
    """Essential-root probabilities alpha_0..alpha_N for the binary symmetric source.

    alpha_0 = 0, alpha_1 = 1 and, conditioning on the first split of the n
    keys (Binomial(n, 1/2) conditioned on being nondegenerate),

        alpha_n = sum_{k=1}^{n-1} C(n,k)/(2^n - 2) (1-alpha_k)(1-alpha_{n-k}).

    Weights are evaluated in log space so the recursion stays overflow-free
    far past n = 5000.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lgamma = np.zeros(N + 2)
    lgamma[1:] = np.cumsum(np.log(np.arange(1, N + 2)))  # lgamma[i] = log(i!)
    log2 = math.log(2.0)
    alphas = np.zeros(N + 1)
    alphas[1] = 1.0
    for n in range(2, N + 1):
        ks = np.arange(1, n)
        log_w = lgamma[n] - lgamma[ks] - lgamma[n - ks] - (n * log2 + math.log1p(-(2.0 ** (1 - n))))
        alphas[n] = float(np.sum(np.exp(log_w) * (1.0 - alphas[ks]) * (1.0 - alphas[n - ks])))
    return alphas


def indnum_mean_bounds(N: int, alphas: np.ndarray | None = None) -> tuple[float, float]:
    """Rigorous enclosure of the limit essential-node ratio, binary symmetric source.

    Counting only essential nodes whose fringe holds at most N keys gives

        partial = 1 + sum_{k=2}^N (1-rho(k)) alpha_k / (k(k-1) H)

    and the neglected larger fringes contribute at most 1/(N H); dividing by
    the deterministic 2n - 1 ~ 2n node count yields the interval
    (partial/2, (partial + 1/(N H))/2) of width 1/(2 N H).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if alphas is None:
        alphas = indnum_alphas(N)
    if len(alphas) < N + 1:
        raise ValueError(f"need alpha_0..alpha_{N}, got {len(alphas)} values")
    h = math.log(2.0)
    ks = np.arange(2, N + 1)
    rho = 2.0 ** (1 - ks.astype(float))
    partial = 1.0 + float(np.sum((1.0 - rho) * alphas[2 : N + 1] / (ks * (ks - 1) * h)))
    return partial / 2.0, (partial + 1.0 / (N * h)) / 2.0
