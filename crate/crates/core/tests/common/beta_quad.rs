//! Regularized incomplete beta by adaptive Simpson quadrature of the Beta
//! density, independent of the continued-fraction implementation.

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    adapt(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 50)
}

/// `int_0^x s^(a-1) (1-s)^(b-1) ds` for `x <= 1/2`. For `a < 1` the
/// substitution `s = u^(1/a)` removes the singularity at 0.
fn lower_part(x: f64, a: f64, b: f64, tol: f64) -> f64 {
    let (g, end): (Box<dyn Fn(f64) -> f64>, f64) = if a < 1.0 {
        (Box::new(move |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a), x.powf(a))
    } else {
        (Box::new(move |s: f64| s.powf(a - 1.0) * (1.0 - s).powf(b - 1.0)), x)
    };
    // scale the integrand to order one so the tolerance is relative
    let scale = (0..=64).map(|k| g(end * k as f64 / 64.0)).fold(f64::MIN_POSITIVE, f64::max);
    scale * integrate(&|u| g(u) / scale, 0.0, end, tol)
}

/// `I_x(a, b)` by quadrature; the normalising constant is integrated too.
pub fn reg_inc_beta_quad(x: f64, a: f64, b: f64) -> f64 {
    let tol = 1e-13;
    let left_half = lower_part(0.5, a, b, tol);
    let right_half = lower_part(0.5, b, a, tol);
    let total = left_half + right_half;
    if x <= 0.5 {
        lower_part(x, a, b, tol) / total
    } else {
        1.0 - lower_part(1.0 - x, b, a, tol) / total
    }
}
