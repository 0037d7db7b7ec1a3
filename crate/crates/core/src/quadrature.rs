//! Composite Simpson rules used by the phase integral.

/// Simpson's rule for `g` over `[a, b]` with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = g(a) + g(b);
    for i in 1..panels {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * g(x) } else { 2.0 * g(x) };
    }
    s * h / 3.0
}

/// Cumulative integral of `g` at the nodes `x₀ < x₁ < …` (uniform spacing
/// `h`), where each coarse interval is split into `refine` (even) Simpson
/// subintervals. The value at `x₀` is 0.
pub fn cumulative_simpson<F: Fn(f64) -> f64>(g: &F, x0: f64, h: f64, n: usize, refine: usize) -> Vec<f64> {
    debug_assert!(refine >= 2 && refine.is_multiple_of(2));
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    let sub = h / refine as f64;
    for i in 1..n {
        let a = x0 + h * (i - 1) as f64;
        let mut s = g(a) + g(a + h);
        for j in 1..refine {
            let x = a + sub * j as f64;
            s += if j % 2 == 1 { 4.0 * g(x) } else { 2.0 * g(x) };
        }
        acc += s * sub / 3.0;
        out.push(acc);
    }
    out
}
