//! First- and second-order overflow thresholds.

use serde::Serialize;

use crate::cost_model::CostModel;
use crate::error::{Error, Result};
use crate::sources::{IidSource, Source};
use crate::spectrum::{gaussian_cdf, gaussian_quantile};

/// Entropies closer than this count as equal.
const ENTROPY_TIE: f64 = 1e-12;
/// `eps` within this of `w(1)` is on the excluded boundary.
const BOUNDARY_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-10;
const BRACKET_TOL: f64 = 1e-12;
/// Residual above which a solve landed on a jump rather than a root.
const STEP_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    FirstOrder,
    SecondOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThresholdCase {
    #[serde(rename = "iid")]
    Iid,
    /// Equal component entropies.
    #[serde(rename = "mixed-I")]
    MixedI,
    /// `H(X_1) > H(X_2)` and `w(1) > eps`.
    #[serde(rename = "mixed-II")]
    MixedII,
    /// `H(X_1) > H(X_2)` and `w(1) < eps`.
    #[serde(rename = "mixed-III")]
    MixedIII,
    /// A zero-variance component enters the defining equation as a step.
    #[serde(rename = "mixed-step")]
    MixedStep,
}

/// Inputs the result was computed from, after ordering the mixture
/// components so that `H(X_1) >= H(X_2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdInputs {
    pub eps: f64,
    pub a: Option<f64>,
    pub alpha_c: f64,
    pub entropy: Vec<f64>,
    pub sigma: Vec<f64>,
    pub weights: Option<[f64; 2]>,
    /// The components were given in the opposite order.
    pub swapped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    /// `R` for first order, `L` for second order.
    pub value: f64,
    pub case: ThresholdCase,
    /// The mixture case behind a `mixed-step` result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub underlying_case: Option<ThresholdCase>,
    /// `|G(value) - eps|` of the defining equation, unless the infimum sits
    /// on a jump.
    pub residual: Option<f64>,
    pub inputs: ThresholdInputs,
}

struct Ordered<'a> {
    weights: [f64; 2],
    comps: [&'a IidSource; 2],
    swapped: bool,
}

fn order(weights: [f64; 2], comps: &[IidSource; 2], k: usize) -> Ordered<'_> {
    if comps[0].entropy(k) + ENTROPY_TIE < comps[1].entropy(k) {
        Ordered { weights: [weights[1], weights[0]], comps: [&comps[1], &comps[0]], swapped: true }
    } else {
        Ordered { weights, comps: [&comps[0], &comps[1]], swapped: false }
    }
}

fn check_boundary(eps: f64, w1: f64) -> Result<()> {
    if (eps - w1).abs() <= BOUNDARY_TOL {
        return Err(Error::MixedBoundary { eps, w1 });
    }
    Ok(())
}

/// `R(eps|X)`, the smallest first-order rate with overflow at most `eps`.
pub fn first_order_threshold(source: &Source, model: &CostModel, eps: f64) -> Result<ThresholdResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidQuery(format!("eps = {eps} must lie in [0, 1)")));
    }
    check_alphabet(source, model)?;
    let alpha = model.capacity()?.alpha_c;
    let k = model.k();
    let (value, case, inputs) = match source {
        Source::Iid(s) => {
            let h = s.entropy(k);
            (h / alpha, ThresholdCase::Iid, iid_inputs(s, k, eps, None, alpha))
        }
        Source::Mixed(m) => {
            let o = order(m.weights(), m.components(), k);
            check_boundary(eps, o.weights[0])?;
            let h = [o.comps[0].entropy(k), o.comps[1].entropy(k)];
            let (value, case) = if h[0] - h[1] <= ENTROPY_TIE {
                (h[0] / alpha, ThresholdCase::MixedI)
            } else if eps < o.weights[0] {
                (h[0] / alpha, ThresholdCase::MixedII)
            } else {
                (h[1] / alpha, ThresholdCase::MixedIII)
            };
            (value, case, mixed_inputs(&o, k, eps, None, alpha))
        }
    };
    Ok(ThresholdResult {
        kind: ThresholdKind::FirstOrder,
        value,
        case,
        underlying_case: None,
        residual: None,
        inputs,
    })
}

/// `L(eps, a|X)`, the smallest second-order deviation around the admissible
/// center `a` with overflow at most `eps`. `a` defaults to that center.
pub fn second_order_threshold(
    source: &Source,
    model: &CostModel,
    eps: f64,
    a: Option<f64>,
) -> Result<ThresholdResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidQuery(format!("eps = {eps} must lie in (0, 1)")));
    }
    check_alphabet(source, model)?;
    let alpha = model.capacity()?.alpha_c;
    let k = model.k();
    match source {
        Source::Iid(s) => {
            let center = s.entropy(k) / alpha;
            let a = admissible(a, center)?;
            let sigma = s.varentropy(k).sqrt();
            let (value, residual) = if sigma > 0.0 {
                let value = sigma / alpha * gaussian_quantile(1.0 - eps)?;
                (value, Some((1.0 - gaussian_cdf(value * alpha / sigma) - eps).abs()))
            } else {
                (0.0, None)
            };
            Ok(ThresholdResult {
                kind: ThresholdKind::SecondOrder,
                value,
                case: ThresholdCase::Iid,
                underlying_case: None,
                residual,
                inputs: iid_inputs(s, k, eps, Some(a), alpha),
            })
        }
        Source::Mixed(m) => {
            let o = order(m.weights(), m.components(), k);
            let w = o.weights;
            check_boundary(eps, w[0])?;
            let h = [o.comps[0].entropy(k), o.comps[1].entropy(k)];
            let sigma = [o.comps[0].varentropy(k).sqrt(), o.comps[1].varentropy(k).sqrt()];
            let phi = move |t: f64, s: f64| step_cdf(t * alpha, s);
            type Tail = Box<dyn Fn(f64) -> f64>;
            let (case, center, stepped, g): (_, _, _, Tail) = if h[0] - h[1] <= ENTROPY_TIE {
                let g = move |t| 1.0 - w[0] * phi(t, sigma[0]) - w[1] * phi(t, sigma[1]);
                (ThresholdCase::MixedI, h[0], sigma[0] == 0.0 || sigma[1] == 0.0, Box::new(g))
            } else if w[0] > eps {
                let g = move |t| w[0] * (1.0 - phi(t, sigma[0]));
                (ThresholdCase::MixedII, h[0], sigma[0] == 0.0, Box::new(g))
            } else {
                let g = move |t| w[0] + w[1] * (1.0 - phi(t, sigma[1]));
                (ThresholdCase::MixedIII, h[1], sigma[1] == 0.0, Box::new(g))
            };
            let a = admissible(a, center / alpha)?;
            let scale = sigma[0].max(sigma[1]);
            let value = infimum_below(&g, eps, if scale > 0.0 { 20.0 * scale / alpha } else { 1.0 });
            let residual = Some((g(value) - eps).abs()).filter(|&r| r <= STEP_RESIDUAL);
            let (case, underlying) = if stepped { (ThresholdCase::MixedStep, Some(case)) } else { (case, None) };
            Ok(ThresholdResult {
                kind: ThresholdKind::SecondOrder,
                value,
                case,
                underlying_case: underlying,
                residual,
                inputs: mixed_inputs(&o, k, eps, Some(a), alpha),
            })
        }
    }
}

fn check_alphabet(source: &Source, model: &CostModel) -> Result<()> {
    if source.alphabet_size() != model.k() {
        return Err(Error::InvalidQuery(format!(
            "source alphabet has {} symbols but the code alphabet has {}",
            source.alphabet_size(),
            model.k()
        )));
    }
    Ok(())
}

fn admissible(a: Option<f64>, expected: f64) -> Result<f64> {
    match a {
        None => Ok(expected),
        Some(a) if (a - expected).abs() <= 1e-9 * expected.abs().max(1.0) => Ok(a),
        Some(a) => Err(Error::InadmissibleCenter { a, expected }),
    }
}

/// `Phi(u / sigma)`, with the pointwise limit as a step when `sigma = 0`.
fn step_cdf(u: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        gaussian_cdf(u / sigma)
    } else if u > 0.0 {
        1.0
    } else if u < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `inf { t : g(t) <= eps }` for nonincreasing `g` that exceeds `eps` far left
/// and falls to at most `eps` far right.
fn infimum_below(g: &dyn Fn(f64) -> f64, eps: f64, half_width: f64) -> f64 {
    let mut lo = -half_width;
    let mut hi = half_width;
    while g(lo) <= eps {
        lo *= 2.0;
    }
    while g(hi) > eps {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BRACKET_TOL || mid <= lo || mid >= hi {
            return hi;
        }
        let gm = g(mid);
        if (gm - eps).abs() <= ROOT_TOL {
            return mid;
        }
        if gm > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn iid_inputs(s: &IidSource, k: usize, eps: f64, a: Option<f64>, alpha: f64) -> ThresholdInputs {
    ThresholdInputs {
        eps,
        a,
        alpha_c: alpha,
        entropy: vec![s.entropy(k)],
        sigma: vec![s.varentropy(k).sqrt()],
        weights: None,
        swapped: false,
    }
}

fn mixed_inputs(o: &Ordered<'_>, k: usize, eps: f64, a: Option<f64>, alpha: f64) -> ThresholdInputs {
    ThresholdInputs {
        eps,
        a,
        alpha_c: alpha,
        entropy: o.comps.iter().map(|c| c.entropy(k)).collect(),
        sigma: o.comps.iter().map(|c| c.varentropy(k).sqrt()).collect(),
        weights: Some(o.weights),
        swapped: o.swapped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::MixedSource;

    fn bern(p: f64) -> IidSource {
        IidSource::bernoulli(p).unwrap()
    }

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    fn mixed(w1: f64, a: f64, b: f64) -> Source {
        MixedSource::new([w1, 1.0 - w1], [bern(a), bern(b)]).unwrap().into()
    }

    fn costs(c: &[f64]) -> CostModel {
        CostModel::new(c.to_vec()).unwrap()
    }

    #[test]
    fn fair_coin_unit_costs() {
        let s: Source = bern(0.5).into();
        for eps in [0.0, 0.1, 0.5, 0.99] {
            let r = first_order_threshold(&s, &CostModel::unit(2).unwrap(), eps).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
            assert_eq!(r.case, ThresholdCase::Iid);
        }
    }

    #[test]
    fn fair_coin_golden_costs() {
        let s: Source = bern(0.5).into();
        let r = first_order_threshold(&s, &costs(&[1.0, 2.0]), 0.3).unwrap();
        let alpha = ((1.0 + 5f64.sqrt()) / 2.0).log2();
        assert!((r.value - 1.0 / alpha).abs() < 1e-10);
        assert!((r.value - 1.44042).abs() < 1e-5);
    }

    #[test]
    fn mixed_first_order_cases() {
        let m = mixed(0.4, 0.5, 0.11);
        let unit = CostModel::unit(2).unwrap();
        let r = first_order_threshold(&m, &unit, 0.2).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.case, ThresholdCase::MixedII);
        let r = first_order_threshold(&m, &unit, 0.7).unwrap();
        assert!((r.value - h2(0.11)).abs() < 1e-12);
        assert!((r.value - 0.499916).abs() < 1e-6);
        assert_eq!(r.case, ThresholdCase::MixedIII);
        assert!(matches!(first_order_threshold(&m, &unit, 0.4), Err(Error::MixedBoundary { .. })));
    }

    #[test]
    fn swapped_components_give_the_same_answer() {
        let unit = CostModel::unit(2).unwrap();
        let a = mixed(0.4, 0.5, 0.11);
        let b = mixed(0.6, 0.11, 0.5);
        for eps in [0.1, 0.3, 0.5, 0.8] {
            let ra = second_order_threshold(&a, &unit, eps, None).unwrap();
            let rb = second_order_threshold(&b, &unit, eps, None).unwrap();
            assert_eq!(ra.value, rb.value);
            assert_eq!(ra.case, rb.case);
            assert!(!ra.inputs.swapped && rb.inputs.swapped);
            assert_eq!(rb.inputs.weights, Some([0.4, 0.6]));
        }
    }

    #[test]
    fn iid_second_order() {
        let s: Source = bern(0.25).into();
        let model = costs(&[1.0, 2.0]);
        let alpha = model.capacity().unwrap().alpha_c;
        let r = second_order_threshold(&s, &model, 0.5, None).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.inputs.a, Some(h2(0.25) / alpha));
        // 1.2815515655446004 is the 0.9 quantile of the standard normal
        let sd = bern(0.25).varentropy(2).sqrt();
        let r = second_order_threshold(&s, &model, 0.1, None).unwrap();
        assert!((r.value - sd / alpha * 1.2815515655446004).abs() < 1e-9);
        assert!(r.residual.unwrap() < 1e-12);
    }

    #[test]
    fn zero_varentropy_gives_zero() {
        let s: Source = bern(0.5).into();
        for eps in [0.01, 0.5, 0.9] {
            let r = second_order_threshold(&s, &CostModel::unit(2).unwrap(), eps, None).unwrap();
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn inadmissible_center() {
        let s: Source = bern(0.25).into();
        let unit = CostModel::unit(2).unwrap();
        assert!(matches!(
            second_order_threshold(&s, &unit, 0.3, Some(0.5)),
            Err(Error::InadmissibleCenter { .. })
        ));
        let m = mixed(0.4, 0.5, 0.11);
        // case III centers on the smaller entropy
        assert!(second_order_threshold(&m, &unit, 0.8, Some(h2(0.11))).is_ok());
        assert!(second_order_threshold(&m, &unit, 0.8, Some(1.0)).is_err());
        assert!(second_order_threshold(&m, &unit, 0.2, Some(1.0)).is_ok());
    }

    #[test]
    fn case_three_matches_rearrangement() {
        let m = mixed(0.4, 0.5, 0.11);
        for model in [CostModel::unit(2).unwrap(), costs(&[1.0, 2.0])] {
            let alpha = model.capacity().unwrap().alpha_c;
            let r = second_order_threshold(&m, &model, 0.8, None).unwrap();
            assert_eq!(r.case, ThresholdCase::MixedIII);
            let s2 = bern(0.11).varentropy(2).sqrt();
            // Phi^-1(1/3) = -0.4307272992954576
            let expected = s2 / alpha * -0.4307272992954576;
            assert!((r.value - expected).abs() < 1e-8, "{} {}", r.value, expected);
        }
    }

    #[test]
    fn case_two_matches_rearrangement() {
        let m = mixed(0.7, 0.3, 0.05);
        let unit = CostModel::unit(2).unwrap();
        let r = second_order_threshold(&m, &unit, 0.35, None).unwrap();
        assert_eq!(r.case, ThresholdCase::MixedII);
        // eps = w1 (1 - Phi(T/sigma1)) => T = sigma1 Phi^-1(0.5)
        assert!(r.value.abs() < 1e-8);
    }

    #[test]
    fn case_one_solves_mixture_equation() {
        // equal entropies: Bern(0.2) and Bern(0.8) have the same H and sigma
        let m = mixed(0.3, 0.2, 0.8);
        let unit = CostModel::unit(2).unwrap();
        let r = second_order_threshold(&m, &unit, 0.1, None).unwrap();
        assert_eq!(r.case, ThresholdCase::MixedI);
        let sd = bern(0.2).varentropy(2).sqrt();
        assert!((r.value - sd * 1.2815515655446004).abs() < 1e-8);
        assert!(r.residual.unwrap() <= 1e-8);
    }

    #[test]
    fn step_mixture() {
        // Bern(0.5) has zero varentropy; case II inverts through it
        let m = mixed(0.6, 0.5, 0.11);
        let unit = CostModel::unit(2).unwrap();
        let r = second_order_threshold(&m, &unit, 0.2, None).unwrap();
        assert_eq!(r.case, ThresholdCase::MixedStep);
        assert_eq!(r.underlying_case, Some(ThresholdCase::MixedII));
        assert!(r.value.abs() < 1e-11);
        // the step's midpoint meets eps = w(1)/2 exactly
        let r = second_order_threshold(&mixed(0.4, 0.5, 0.11), &unit, 0.2, None).unwrap();
        assert_eq!(r.case, ThresholdCase::MixedStep);
        assert_eq!(r.value, 0.0);
        let r = second_order_threshold(&m, &unit, 0.2, None).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["case"], "mixed-step");
        assert_eq!(json["underlying_case"], "mixed-II");
    }

    #[test]
    fn classification_is_exhaustive() {
        let unit = CostModel::unit(2).unwrap();
        for w1 in [0.1, 0.3, 0.5, 0.9] {
            for (a, b) in [(0.5, 0.11), (0.11, 0.5), (0.2, 0.8), (0.3, 0.05)] {
                let m = mixed(w1, a, b);
                for eps in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
                    let r = second_order_threshold(&m, &unit, eps, None).unwrap();
                    let c = r.underlying_case.unwrap_or(r.case);
                    let h = &r.inputs.entropy;
                    let w = r.inputs.weights.unwrap()[0];
                    assert!(h[0] >= h[1]);
                    let expected = if (h[0] - h[1]).abs() <= ENTROPY_TIE {
                        ThresholdCase::MixedI
                    } else if w > eps {
                        ThresholdCase::MixedII
                    } else {
                        ThresholdCase::MixedIII
                    };
                    assert_eq!(c, expected);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let s: Source = bern(0.3).into();
        let unit = CostModel::unit(2).unwrap();
        assert!(first_order_threshold(&s, &unit, 1.0).is_err());
        assert!(first_order_threshold(&s, &unit, -0.1).is_err());
        assert!(second_order_threshold(&s, &unit, 0.0, None).is_err());
        assert!(second_order_threshold(&mixed(0.4, 0.5, 0.11), &unit, 0.4, None).is_err());
        assert!(first_order_threshold(&s, &costs(&[1.0, 1.0, 1.0]), 0.1).is_err());
    }

    #[test]
    fn json_shape() {
        let r = first_order_threshold(&mixed(0.4, 0.5, 0.11), &CostModel::unit(2).unwrap(), 0.7).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "first-order");
        assert_eq!(v["case"], "mixed-III");
        assert_eq!(v["inputs"]["weights"][0], 0.4);
        assert!(v.get("underlying_case").is_none());
    }
}
