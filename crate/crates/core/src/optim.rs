//! One-dimensional numerical primitives shared by the divergence and risk
//! modules: golden-section search, a safeguarded boundary search for
//! monotone functions, and Gauss–Legendre rules.

/// 1/phi, the golden-section contraction factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Outcome of a golden-section minimization.
#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Minimizes `f` on `[lo, hi]` by golden-section search until the bracket is
/// narrower than `xtol`. The endpoints are compared against the interior
/// optimum at the end, so minima sitting on the boundary are returned exactly.
///
/// For unimodal `f` the result is within `xtol` of a minimizer. Infinite
/// values are allowed and compare as worse than any finite value.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> GoldenResult
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > xtol && iterations < max_iter {
        if less(fc, fd) || (fc == fd && !fc.is_nan()) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let mut best = if less(fd, fc) { (d, fd) } else { (c, fc) };
    for x in [lo, hi] {
        let fx = f(x);
        if less(fx, best.1) {
            best = (x, fx);
        }
    }
    GoldenResult {
        x: best.0,
        fx: best.1,
        iterations,
    }
}

/// NaN-aware strict comparison: NaN is never "less".
#[inline]
fn less(a: f64, b: f64) -> bool {
    !a.is_nan() && (b.is_nan() || a < b)
}

/// Result of [`locate_boundary`]: the final bracket `[left, right]`, where
/// `left` is on the "false" side of the predicate and `right` on the "true"
/// side.
#[derive(Debug, Clone, Copy)]
pub struct Boundary {
    pub left: f64,
    pub right: f64,
    pub iterations: usize,
}

/// Locates the switch point of a monotone predicate `is_right(g(x))` inside
/// `[left, right]`, where the predicate is false at `left` and true at
/// `right`.
///
/// Steps use regula falsi with the Illinois modification toward the root of
/// `g` and fall back to bisection whenever the bracket fails to halve over
/// two consecutive steps or the secant is unusable (non-finite values). This
/// keeps the superlinear rate on smooth `g` and the bisection guarantee on
/// step functions.
pub fn locate_boundary<G, P>(
    g: G,
    is_right: P,
    mut left: f64,
    mut g_left: f64,
    mut right: f64,
    mut g_right: f64,
    abs_tol: f64,
    max_iter: usize,
) -> Boundary
where
    G: Fn(f64) -> f64,
    P: Fn(f64) -> bool,
{
    let mut last_side = 0i8;
    let mut width_two_back = f64::INFINITY;
    let mut width_one_back = right - left;
    let mut iterations = 0;
    while iterations < max_iter {
        let width = right - left;
        if width <= abs_tol {
            break;
        }
        // stops at adjacent floats when abs_tol is below their spacing
        let mid = 0.5 * (left + right);
        if mid <= left || mid >= right {
            break;
        }
        let force_bisect = width > 0.5 * width_two_back;
        let mut c = mid;
        if !force_bisect && g_left.is_finite() && g_right.is_finite() && g_right != g_left {
            let s = left - g_left * (right - left) / (g_right - g_left);
            if s > left && s < right {
                c = s;
            }
        }
        let gc = g(c);
        if is_right(gc) {
            right = c;
            g_right = gc;
            if last_side == 1 {
                g_left *= 0.5;
            }
            last_side = 1;
        } else {
            left = c;
            g_left = gc;
            if last_side == -1 {
                g_right *= 0.5;
            }
            last_side = -1;
        }
        width_two_back = width_one_back;
        width_one_back = width;
        iterations += 1;
    }
    Boundary {
        left,
        right,
        iterations,
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] computed by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
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

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on (0, 1): `panels` equal panels of
/// `order` points each. All nodes lie strictly inside (0, 1).
pub fn composite_unit_rule(panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(a + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}
