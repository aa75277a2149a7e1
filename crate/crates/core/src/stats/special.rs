//! Special functions behind the tail probabilities of the test battery.

use crate::scalar::Real;

const MAX_ITER: usize = 500;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn tiny<F: Real>() -> F {
    F::min_positive_value() / F::epsilon()
}

fn tolerance<F: Real>() -> F {
    F::epsilon() * F::c(4.0)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<F: Real>(x: F) -> F {
    let half = F::c(0.5);
    if x < half {
        // reflection
        let pi = F::c(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = F::c(LANCZOS[0]);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + F::c(coef) / (x + F::from_usize_lossy(i));
    }
    let t = x + F::c(LANCZOS_G) + half;
    F::c(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<F: Real>(a: F, x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x < a + F::one() {
        gamma_series(a, x)
    } else {
        F::one() - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q<F: Real>(a: F, x: F) -> F {
    if x <= F::zero() {
        return F::one();
    }
    if x < a + F::one() {
        F::one() - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series<F: Real>(a: F, x: F) -> F {
    let mut ap = a;
    let mut sum = F::one() / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap = ap + F::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * tolerance::<F>() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cont_frac<F: Real>(a: F, x: F) -> F {
    let two = F::c(2.0);
    let mut b = x + F::one() - a;
    let mut c = F::one() / tiny::<F>();
    let mut d = F::one() / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let fi = F::from_usize_lossy(i);
        let an = -fi * (fi - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = b + an / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = F::one() / d;
        let del = d * c;
        h = h * del;
        if (del - F::one()).abs() < tolerance::<F>() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc<F: Real>(a: F, b: F, x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x >= F::one() {
        return F::one();
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (F::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + F::one()) / (a + b + F::c(2.0)) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        F::one() - front * beta_cont_frac(b, a, F::one() - x) / b
    }
}

fn beta_cont_frac<F: Real>(a: F, b: F, x: F) -> F {
    let one = F::one();
    let two = F::c(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny() {
        d = tiny();
    }
    d = one / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = F::from_usize_lossy(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < tolerance::<F>() {
            break;
        }
    }
    h
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf<F: Real>(x: F, df: F) -> F {
    let half = F::c(0.5);
    gamma_q(df * half, x * half)
}

/// Two-sided tail probability of Student's t.
pub fn student_t_two_sided<F: Real>(t: F, df: F) -> F {
    if t.is_infinite() {
        return F::zero();
    }
    let x = df / (df + t * t);
    beta_inc(df * F::c(0.5), F::c(0.5), x)
}

/// Upper tail of the F distribution.
pub fn f_sf<F: Real>(f: F, df1: F, df2: F) -> F {
    if f <= F::zero() {
        return F::one();
    }
    let half = F::c(0.5);
    beta_inc(df2 * half, df1 * half, df2 / (df2 + df1 * f))
}

/// Standard normal cumulative distribution.
pub fn normal_cdf<F: Real>(z: F) -> F {
    let half = F::c(0.5);
    let erfc_arg = (z / F::c(std::f64::consts::SQRT_2)).abs();
    let erfc = gamma_q(half, erfc_arg * erfc_arg);
    if z >= F::zero() {
        F::one() - half * erfc
    } else {
        half * erfc
    }
}

/// Standard normal quantile, `p` in `(0, 1)`.
///
/// Acklam's rational approximation refined by one Halley step against
/// [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let p_low = 0.024_25;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}
