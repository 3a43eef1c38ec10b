"""Independent reference values for special functions and impairment models.

Everything is computed with mpmath at 40 digits, from defining integrals or
root finding rather than the closed forms used by the library. The printed
values are frozen into tests/unit/*.cpp.
"""
import mpmath as mp

mp.mp.dps = 40


def show(label, v):
    print(f"{label} = {mp.nstr(v, 20)}")


def ext_gamma(a, x, b, scaled=False):
    # Integrate e^x times the integrand; the unscaled form loses digits when x is large.
    x = mp.mpf(x)
    f = lambda t: t ** (a - 1) * mp.exp(-(t - x) - b / t)
    peak = ((a - 1) + mp.sqrt((a - 1) ** 2 + 4 * b)) / 2
    pts = [x + d for d in (0.5, 1, 2, 4, 8, 16, 32, 64, 128)] + [peak / 4, peak, 4 * peak, peak + 40]
    pts = sorted(set([x] + [p for p in pts if p > x]))
    v = mp.quad(f, pts + [mp.inf])
    return v if scaled else v * mp.exp(-x)


def clipping(ibo, s2=1):
    amp = mp.sqrt(ibo * s2)
    dens = lambda r: 2 * r / s2 * mp.exp(-r * r / s2)
    g = lambda r: min(r, amp)
    alpha = mp.quad(lambda r: g(r) * r * dens(r), [0, amp, mp.inf]) / s2
    power = mp.quad(lambda r: g(r) ** 2 * dens(r), [0, amp, mp.inf])
    return alpha, power - alpha**2 * s2


def polynomial(coeffs, s2=1):
    dens = lambda r: 2 * r / s2 * mp.exp(-r * r / s2)
    gain = lambda r: sum(c * r ** m for m, c in enumerate(coeffs))  # f(s) = s * gain(|s|)
    alpha = mp.quad(lambda r: gain(r) * r * r * dens(r), [0, mp.inf]) / s2
    power = mp.quad(lambda r: abs(gain(r)) ** 2 * r * r * dens(r), [0, mp.inf])
    return alpha, power - abs(alpha) ** 2 * s2


def irr_forward(eps, th):
    k1 = (1 + 2 * eps * mp.cos(th) + eps**2) / 4
    k2 = (1 - 2 * eps * mp.cos(th) + eps**2) / 4
    return 10 * mp.log10(k1 / k2)


def kernel(f, fc, delta):
    lo, hi = fc - f, fc + f
    return (lo * mp.atan(delta * mp.tan(mp.pi * lo)) + hi * mp.atan(delta * mp.tan(-mp.pi * hi))
            - (hi / mp.tan(mp.pi * hi) - lo / mp.tan(mp.pi * lo)) / delta
            + (mp.log(abs(mp.sin(mp.pi * hi))) + mp.log(abs(mp.sin(mp.pi * lo)))) / (mp.pi * delta))


def leakage(beta, W, Wsb, K, k_from, k_to):
    e = mp.exp(-2 * mp.pi * beta / W)
    delta = (e + 1) / (e - 1)
    fc = mp.mpf(Wsb) / (2 * W)
    center = lambda k: mp.sign(k) * (2 * abs(k) - 1) / (2 * mp.mpf(K))
    d = center(k_from) - center(k_to)
    return abs(kernel(d + fc, fc, delta) - kernel(d - fc, fc, delta)) / (2 * mp.pi * fc)


if __name__ == "__main__":
    for x in (1, 3, -0.5, 8):
        show(f"Q({x})", mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2)
    for a, x in ((5, 5), (0.5, 2), (-2.5, 0.7), (-3, 1.2), (0, 0.3), (7.5, 0.01)):
        show(f"upper({a},{x})", mp.gammainc(a, x, mp.inf))
    for a, x in ((5, 5), (2.5, 1.3)):
        show(f"lower({a},{x})", mp.gammainc(a, 0, x))
    show("ext(1,0,1) via 2K1(2)", 2 * mp.besselk(1, 2))
    for a, x, b in ((-1, 0.8, 0.3), (-4, 0.5, 0.2), (1, 1, 0.1), (2.5, 3, 4), (-6, 0.01, 5), (3, 0.05, 1.5)):
        show(f"ext({a},{x},{b})", ext_gamma(mp.mpf(a), mp.mpf(x), mp.mpf(b)))
    for x, b in ((40, 300), (2000, 5e4)):
        for j in range(3):
            show(f"scaled(a={2 - j},{x},{b})", ext_gamma(mp.mpf(2 - j), x, mp.mpf(b), scaled=True))
    for ibo_db in (0, 3, 6, 9):
        ibo = mp.mpf(10) ** (mp.mpf(ibo_db) / 10)
        a, s = clipping(ibo)
        show(f"clip alpha ibo_db={ibo_db}", a)
        show(f"clip sigma_e2 ibo_db={ibo_db}", s)
    a, s = clipping(mp.mpf(2), mp.mpf("2.5"))
    show("clip alpha ibo=2 s2=2.5", a)
    show("clip sigma_e2 ibo=2 s2=2.5", s)
    for coeffs in ([1, 0, -0.1], [1, mp.mpc(0.05, -0.02), mp.mpc(-0.1, 0.01)]):
        for s2 in (1, 0.5):
            a, s = polynomial([mp.mpmathify(c) for c in coeffs], mp.mpf(s2))
            show(f"poly {coeffs} s2={s2} alpha", a)
            show(f"poly {coeffs} s2={s2} sigma_e2", s)
    th = mp.radians(3)
    for irr in (20, 25):
        below = mp.findroot(lambda e: irr_forward(e, th) - irr, (mp.mpf("0.5"), mp.mpf("0.999")), solver="bisect")
        above = mp.findroot(lambda e: irr_forward(e, th) - irr, (mp.mpf("1.001"), mp.mpf(2)), solver="bisect")
        show(f"eps irr={irr} below", below)
        show(f"eps irr={irr} above", above)
    show("phn var", 4 * mp.pi * 100 / mp.mpf(9e6))
    for k_from, k_to in ((1, 2), (3, 2), (-1, -2), (-3, -2)):
        show(f"A({k_from}->{k_to}) beta=100", leakage(100, 9e6, 1e6, 8, k_from, k_to))
    show("A(1->2) beta=1e4", leakage(1e4, 9e6, 1e6, 8, 1, 2))
