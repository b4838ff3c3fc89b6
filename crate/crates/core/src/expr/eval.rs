//! Interval evaluation, point evaluation and forward-mode derivatives.

use crate::interval::Interval;

use super::{EvalError, Node};

/// Value and signed partial-derivative enclosures over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct GradEnclosure {
    pub value: Interval,
    /// One entry per declared variable; variables the expression does not
    /// mention get `[0, 0]`.
    pub partials: Vec<Interval>,
}

/// Enclosures of `msin(u, v)` and its two partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsinEnclosure {
    pub value: Interval,
    pub du: Interval,
    pub dv: Interval,
}

/// Encloses `msin(u, v) = ∫₀¹ cos(u + s·v) ds` and its partials over `u × v`.
///
/// Three enclosures are intersected, each sound on its own:
///
/// * every `u + s·v` lies in `H = hull(u, u + v)`, so the value is in
///   `cos(H)`, `∂/∂u = ∫ -sin(u + s·v) ds` is in `-sin(H)` and
///   `∂/∂v = ∫ -s·sin(u + s·v) ds` is in `-sin(H) / 2`;
/// * `msin(u, v) = cos(u + w)·sinc(w)` with `w = v/2`, where `sinc` and its
///   derivative are bracketed by two-term truncations of their alternating
///   series (valid for `|w| <= 2`); this is tight for thin boxes near `v = 0`;
/// * away from `v = 0` the divided differences themselves.
pub fn msin_enclosures(u: Interval, v: Interval) -> MsinEnclosure {
    let h = u.hull(&(u + v));
    let s = h.sin();
    let mut value = h.cos();
    let mut du = -s;
    let mut dv = -(s.scale(0.5));

    let w = v.scale(0.5);
    if w.mag() <= 2.0 {
        let w2 = w.powi(2);
        let sinc = Interval::ONE - w2.checked_div(Interval::point(6.0)).expect("nonzero")
            + Interval::ZERO.hull(&w2.powi(2).checked_div(Interval::point(120.0)).expect("nonzero"));
        let dsinc = -(w.checked_div(Interval::point(3.0)).expect("nonzero"))
            + Interval::ZERO.hull(&w.powi(3).checked_div(Interval::point(30.0)).expect("nonzero"));
        let mid = u + w;
        let (c, sn) = (mid.cos(), mid.sin());
        value = tighten(value, c * sinc);
        du = tighten(du, -(sn * sinc));
        dv = tighten(dv, (c * dsinc - sn * sinc).scale(0.5));
    }

    if !v.contains_zero() {
        let end = u + v;
        if let Ok(q) = (end.sin() - u.sin()).checked_div(v) {
            value = tighten(value, q);
        }
        if let Ok(q) = (end.cos() - u.cos()).checked_div(v) {
            du = tighten(du, q);
        }
        if let Ok(q) = (end.cos() - value).checked_div(v) {
            dv = tighten(dv, q);
        }
    }
    MsinEnclosure { value, du, dv }
}

/// Intersection of two enclosures of the same quantity. They always meet
/// mathematically; keep the first should rounding ever separate them.
fn tighten(a: Interval, b: Interval) -> Interval {
    a.intersect(&b).interval().unwrap_or(a)
}

/// Point value of `msin`, using `cos(u + v/2)·sin(v/2)/(v/2)` which stays
/// accurate as `v` approaches zero.
pub fn msin_point(u: f64, v: f64) -> f64 {
    let w = 0.5 * v;
    let sinc = if w == 0.0 { 1.0 } else { w.sin() / w };
    (u + w).cos() * sinc
}

/// Interval value of every node. `map[k]` gives the slot in `inputs` for
/// expression variable `k`.
pub(super) fn values(nodes: &[Node], map: &[usize], inputs: &[Interval]) -> Result<Vec<Interval>, EvalError> {
    let mut out: Vec<Interval> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let v = match *node {
            Node::Const(c) => Interval::point(c),
            Node::Var(k) => inputs[map[k]],
            Node::Add(a, b) => out[a] + out[b],
            Node::Sub(a, b) => out[a] - out[b],
            Node::Mul(a, b) => out[a] * out[b],
            Node::Div(a, b) => out[a].checked_div(out[b])?,
            Node::Neg(a) => -out[a],
            Node::Pow(a, n) => out[a].powi(n),
            Node::Sin(a) => out[a].sin(),
            Node::Cos(a) => out[a].cos(),
            Node::Msin(u, v) => msin_enclosures(out[u], out[v]).value,
        };
        out.push(v);
    }
    Ok(out)
}

pub(super) fn point(nodes: &[Node], map: &[usize], x: &[f64]) -> f64 {
    let mut out: Vec<f64> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let v = match *node {
            Node::Const(c) => c,
            Node::Var(k) => x[map[k]],
            Node::Add(a, b) => out[a] + out[b],
            Node::Sub(a, b) => out[a] - out[b],
            Node::Mul(a, b) => out[a] * out[b],
            Node::Div(a, b) => out[a] / out[b],
            Node::Neg(a) => -out[a],
            Node::Pow(a, n) => out[a].powi(n.min(i32::MAX as u32) as i32),
            Node::Sin(a) => out[a].sin(),
            Node::Cos(a) => out[a].cos(),
            Node::Msin(u, v) => msin_point(out[u], out[v]),
        };
        out.push(v);
    }
    out[nodes.len() - 1]
}

/// Forward-mode tangent of the root along expression variable `k`, given
/// the node values from [`values`].
pub(super) fn tangent(nodes: &[Node], vals: &[Interval], k: usize) -> Result<Interval, EvalError> {
    let mut d: Vec<Interval> = Vec::with_capacity(nodes.len());
    let zero = |x: &Interval| x.lo() == 0.0 && x.hi() == 0.0;
    for (i, node) in nodes.iter().enumerate() {
        let t = match *node {
            Node::Const(_) => Interval::ZERO,
            Node::Var(m) => {
                if m == k {
                    Interval::ONE
                } else {
                    Interval::ZERO
                }
            }
            Node::Add(a, b) => d[a] + d[b],
            Node::Sub(a, b) => d[a] - d[b],
            Node::Mul(a, b) => match (zero(&d[a]), zero(&d[b])) {
                (true, true) => Interval::ZERO,
                (false, true) => d[a] * vals[b],
                (true, false) => vals[a] * d[b],
                (false, false) => d[a] * vals[b] + vals[a] * d[b],
            },
            // (a/b)' = (a' - (a/b)·b') / b
            Node::Div(a, b) => {
                if zero(&d[a]) && zero(&d[b]) {
                    Interval::ZERO
                } else {
                    (d[a] - vals[i] * d[b]).checked_div(vals[b])?
                }
            }
            Node::Neg(a) => -d[a],
            Node::Pow(a, n) => {
                if n == 0 || zero(&d[a]) {
                    Interval::ZERO
                } else {
                    vals[a].powi(n - 1).scale(n as f64) * d[a]
                }
            }
            Node::Sin(a) => vals[a].cos() * d[a],
            Node::Cos(a) => -(vals[a].sin()) * d[a],
            Node::Msin(u, v) => {
                if zero(&d[u]) && zero(&d[v]) {
                    Interval::ZERO
                } else {
                    let m = msin_enclosures(vals[u], vals[v]);
                    m.du * d[u] + m.dv * d[v]
                }
            }
        };
        d.push(t);
    }
    Ok(d[nodes.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn msin_at_origin() {
        let m = msin_enclosures(Interval::ZERO, Interval::ZERO);
        assert_eq!(m.value, Interval::ONE);
        assert!(m.du.contains(0.0) && m.du.width() < 1e-300);
        assert!(m.dv.contains(0.0) && m.dv.width() < 1e-300);
        assert_eq!(msin_point(0.0, 0.0), 1.0);
    }

    #[test]
    fn msin_small_step() {
        let m = msin_enclosures(Interval::ZERO, iv(-0.005, 0.005));
        let c = iv(-0.005, 0.005).cos();
        assert!(m.value.is_subset_of(&c));
        assert!(m.value.lo() > 0.99998 && m.value.hi() == 1.0);
    }

    #[test]
    fn msin_point_matches_divided_difference() {
        for &(u, v) in &[(0.3, 0.2), (-1.0, 0.7), (2.0, -0.4)] {
            let direct = ((u + v as f64).sin() - u.sin()) / v;
            assert!((msin_point(u, v) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn even_power_not_repeated_product() {
        let e = parse("x^2").unwrap().bind(&names(&["x"])).unwrap();
        assert_eq!(e.eval(&[Interval::UNIT]).unwrap(), iv(0.0, 1.0));
    }

    #[test]
    fn constant_has_zero_gradient() {
        let e = parse("3.5").unwrap().bind(&names(&["a", "b"])).unwrap();
        let g = e.grad(&[Interval::UNIT, Interval::UNIT]).unwrap();
        assert_eq!(g.partials, vec![Interval::ZERO; 2]);
        assert_eq!(g.value, Interval::point(3.5));
    }

    #[test]
    fn taylor_time_derivative() {
        let decl = names(&["e1", "e2", "e3", "t"]);
        let e = parse("0.1*e1 + (1 + 0.01*e2)*t + 1.31e-7*e3*t^2")
            .unwrap()
            .bind(&decl)
            .unwrap();
        let dom = [Interval::UNIT, Interval::UNIT, Interval::UNIT, iv(0.0, 0.5)];
        let g = e.grad(&dom).unwrap();
        let dt = g.partials[3];
        assert!(dt.lo() <= 0.989999869 && dt.hi() >= 1.010000131);
        assert!(dt.lo() > 0.989999868 && dt.hi() < 1.010000132);
    }

    #[test]
    fn division_by_zero_interval_propagates() {
        let e = parse("1/x").unwrap().bind(&names(&["x"])).unwrap();
        assert!(matches!(e.eval(&[Interval::UNIT]), Err(EvalError::Interval(_))));
        assert!(e.eval(&[iv(1.0, 2.0)]).is_ok());
    }

    #[test]
    fn partial_of_absent_variable() {
        let e = parse("x*x").unwrap().bind(&names(&["x", "y"])).unwrap();
        assert_eq!(e.partial(&[Interval::UNIT, Interval::UNIT], 1).unwrap(), Interval::ZERO);
        assert_eq!(e.partial(&[iv(1.0, 2.0), Interval::UNIT], 0).unwrap(), iv(2.0, 4.0));
    }

    #[test]
    fn arity_is_checked() {
        let e = parse("x").unwrap().bind(&names(&["x", "y"])).unwrap();
        assert_eq!(e.eval(&[Interval::UNIT]).unwrap_err(), EvalError::ArityMismatch { expected: 2, got: 1 });
    }
}
