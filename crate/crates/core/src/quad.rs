//! One-dimensional adaptive Gauss–Kronrod quadrature and Gauss–Legendre
//! rules. Used by the constants module and by test oracles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> QuadResult {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    QuadResult { value: kronrod * h, error: ((kronrod - gauss) * h).abs() }
}

struct Segment {
    a: f64,
    b: f64,
    est: QuadResult,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Adaptive quadrature controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_segments: 20_000 }
    }
}

/// Adaptive G7–K15 integration of `f` over `(a, b)`; either endpoint may be
/// infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    integrate_dyn(&f, a, b, cfg)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    if a > b {
        let r = integrate_dyn(f, b, a, cfg)?;
        return Ok(QuadResult { value: -r.value, error: r.error });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(f, a, b, cfg),
        // x = a + t / (1 - t)
        (true, false) => adapt(
            &|t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            },
            0.0,
            1.0,
            cfg,
        ),
        // x = b - (1 - t) / t
        (false, true) => adapt(
            &|t: f64| {
                let s = 1.0 - t;
                f(b - s / t) / (t * t)
            },
            0.0,
            1.0,
            cfg,
        ),
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, cfg)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, cfg)?;
            Ok(QuadResult { value: left.value + right.value, error: left.error + right.error })
        }
    }
}

/// Integrates over consecutive sub-intervals split at `points`, which
/// should include the kinks or discontinuities of `f`.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: QuadConfig) -> Result<QuadResult> {
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    for w in points.windows(2) {
        let r = integrate(&f, w[0], w[1], cfg)?;
        value.add(r.value);
        error += r.error;
    }
    Ok(QuadResult { value: value.value(), error })
}

fn adapt<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let first = gk15(f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(Segment { a, b, est: first });
    while err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if heap.len() >= cfg.max_segments {
            return Err(Error::ToleranceNotReached { requested: cfg.abs_tol.max(cfg.rel_tol * total.abs()), achieved: err });
        }
        let seg = heap.pop().expect("heap is never empty");
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            // Interval can no longer be split in floating point.
            heap.push(seg);
            return Err(Error::ToleranceNotReached { requested: cfg.abs_tol, achieved: err });
        }
        let l = gk15(f, seg.a, m);
        let r = gk15(f, m, seg.b);
        total += l.value + r.value - seg.est.value;
        err += l.error + r.error - seg.est.error;
        heap.push(Segment { a: seg.a, b: m, est: l });
        heap.push(Segment { a: m, b: seg.b, est: r });
    }
    // Re-sum to avoid drift from the running updates.
    let value = heap.iter().map(|s| s.est.value).collect::<CompensatedSum>().value();
    let error = heap.iter().map(|s| s.est.error).sum();
    Ok(QuadResult { value, error })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
