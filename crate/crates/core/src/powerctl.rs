//! Utility-maximizing power allocation for zero-forcing users.
//!
//! User `i` reaches SINR `rho_i b_i` (per unit of array gain) and spends
//! physical power `rho_i c_i` from a shared budget `Q`. For a concave
//! increasing utility `U` with invertible derivative, the optimum is
//!
//! ```text
//! rho_i = [U'^-1(c_i / (nu b_i))]_+ / b_i
//! ```
//!
//! with the multiplier `nu` chosen so the budget binds. [`solve_allocation`]
//! finds `nu` by bisection for any such utility; the three named utilities
//! also have exact closed forms.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User-supplied utility, described by the inverse of its derivative and,
/// optionally, its value (needed only by the grid oracle).
#[derive(Clone)]
pub struct CustomUtility {
    pub derivative_inverse: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub value: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomUtility").field("has_value", &self.value.is_some()).finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    /// `U(x) = ln x`
    ProportionalFairness,
    /// `U(x) = log2(1 + x)`
    SumSe,
    /// `U(x) = -1 / x`
    HarmonicMean,
    #[serde(skip)]
    Custom(CustomUtility),
}

impl UtilityKind {
    pub const NAMED: [UtilityKind; 3] =
        [UtilityKind::ProportionalFairness, UtilityKind::SumSe, UtilityKind::HarmonicMean];

    pub fn name(&self) -> &'static str {
        match self {
            UtilityKind::ProportionalFairness => "proportional_fairness",
            UtilityKind::SumSe => "sum_se",
            UtilityKind::HarmonicMean => "harmonic_mean",
            UtilityKind::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::NAMED.into_iter().find(|u| u.name() == name)
    }

    /// `U(x)`; `None` for a custom utility without a value function.
    pub fn value(&self, x: f64) -> Option<f64> {
        match self {
            UtilityKind::ProportionalFairness => Some(x.ln()),
            UtilityKind::SumSe => Some((1.0 + x).log2()),
            UtilityKind::HarmonicMean => Some(-1.0 / x),
            UtilityKind::Custom(c) => c.value.as_ref().map(|f| f(x)),
        }
    }

    /// `U'(x)` for the named utilities.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            UtilityKind::ProportionalFairness => Some(1.0 / x),
            UtilityKind::SumSe => Some(1.0 / ((1.0 + x) * LN_2)),
            UtilityKind::HarmonicMean => Some(1.0 / (x * x)),
            UtilityKind::Custom(_) => None,
        }
    }

    /// `U'^-1(y)` before clipping; may be negative when `y` exceeds the
    /// supremum of `U'`, which the allocation clips to zero.
    pub fn derivative_inverse(&self, y: f64) -> f64 {
        match self {
            UtilityKind::ProportionalFairness => 1.0 / y,
            UtilityKind::SumSe => 1.0 / (y * LN_2) - 1.0,
            UtilityKind::HarmonicMean => 1.0 / y.sqrt(),
            UtilityKind::Custom(c) => (c.derivative_inverse)(y),
        }
    }
}

/// Gains `b_i`, costs `c_i` and total budget `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    gains: Vec<f64>,
    costs: Vec<f64>,
    budget: f64,
}

impl AllocationProblem {
    pub fn new(gains: Vec<f64>, costs: Vec<f64>, budget: f64) -> Result<Self> {
        if gains.is_empty() || gains.len() != costs.len() {
            return Err(Error::InvalidProblem(format!(
                "need one gain and one cost per user, got {} and {}",
                gains.len(),
                costs.len()
            )));
        }
        for (index, &b) in gains.iter().enumerate() {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::ZeroGain { index });
            }
            if !b.is_finite() {
                return Err(Error::InvalidProblem(format!("gain of user {index} is not finite")));
            }
        }
        if let Some((index, c)) = costs.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidProblem(format!("cost {c} of user {index} must be positive")));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidProblem(format!("budget must be positive, got {budget}")));
        }
        Ok(Self { gains, costs, budget })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Normalized powers `rho_i`.
    pub powers: Vec<f64>,
    /// Budget multiplier `nu`.
    pub multiplier: f64,
    /// `rho_i b_i`; multiply by the element count (or `L H`) for the SINR.
    pub sinrs: Vec<f64>,
}

impl PowerAllocation {
    fn new(problem: &AllocationProblem, powers: Vec<f64>, multiplier: f64) -> Self {
        let sinrs = powers.iter().zip(&problem.gains).map(|(p, b)| p * b).collect();
        Self { powers, multiplier, sinrs }
    }

    /// Physical powers `q_i = rho_i c_i`.
    pub fn physical_powers(&self, problem: &AllocationProblem) -> Vec<f64> {
        self.powers.iter().zip(&problem.costs).map(|(p, c)| p * c).collect()
    }

    /// `sum_i rho_i c_i`.
    pub fn spent(&self, problem: &AllocationProblem) -> f64 {
        self.physical_powers(problem).iter().sum()
    }

    /// `sum_i U(rho_i b_i)`.
    pub fn utility(&self, utility: &UtilityKind) -> Option<f64> {
        self.sinrs.iter().map(|&x| utility.value(x)).sum()
    }
}

const BRACKET_STEPS: usize = 2000;
const BISECTION_STEPS: usize = 200;

fn powers_at(problem: &AllocationProblem, utility: &UtilityKind, nu: f64) -> Vec<f64> {
    problem
        .gains
        .iter()
        .zip(&problem.costs)
        .map(|(&b, &c)| {
            let x = utility.derivative_inverse(c / (nu * b));
            if x > 0.0 { x / b } else { 0.0 }
        })
        .collect()
}

fn spent_at(problem: &AllocationProblem, utility: &UtilityKind, nu: f64) -> f64 {
    powers_at(problem, utility, nu).iter().zip(&problem.costs).map(|(p, c)| p * c).sum()
}

/// Allocation for any utility with decreasing `U'^-1`, by bisection on the
/// budget multiplier.
///
/// The bracket starts at `nu = Q max_i c_i` and grows geometrically until the
/// spent power crosses the budget; bisection then runs until the bracket
/// collapses to adjacent floats or 200 halvings.
pub fn solve_allocation(problem: &AllocationProblem, utility: &UtilityKind) -> Result<PowerAllocation> {
    let budget = problem.budget;
    let start = budget * problem.costs.iter().copied().fold(0.0, f64::max);
    let spent = |nu: f64| spent_at(problem, utility, nu);

    let mut hi = start;
    let mut steps = 0;
    // NaN spending keeps growing the bracket
    while spent(hi).partial_cmp(&budget).is_none_or(|o| o.is_lt()) {
        hi *= 2.0;
        steps += 1;
        if steps > BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::NonBindingBudget);
        }
    }
    let mut lo = start;
    steps = 0;
    while spent(lo) > budget {
        lo *= 0.5;
        steps += 1;
        if steps > BRACKET_STEPS || lo == 0.0 {
            return Err(Error::NonBindingBudget);
        }
    }
    if lo == hi {
        lo *= 0.5;
    }

    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spent(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let nu = if (spent(hi) - budget).abs() <= (spent(lo) - budget).abs() { hi } else { lo };
    let mut powers = powers_at(problem, utility, nu);

    // remove the last rounding-level mismatch so the budget binds exactly
    let used = spent(nu);
    if used > 0.0 {
        let scale = budget / used;
        powers.iter_mut().for_each(|p| *p *= scale);
    }
    Ok(PowerAllocation::new(problem, powers, nu))
}

/// `U = ln x`: equal physical power, `rho_i = Q / (c_i K)` and `nu = Q / K`.
pub fn alloc_proportional_fairness(problem: &AllocationProblem) -> PowerAllocation {
    let k = problem.users() as f64;
    let share = problem.budget / k;
    let powers = problem.costs.iter().map(|c| problem.budget / (c * k)).collect();
    PowerAllocation::new(problem, powers, share)
}

/// `U = log2(1 + x)`: waterfilling on physical power,
/// `rho_i = [nu / (ln2 c_i) - 1 / b_i]_+`.
///
/// Users are ranked by their floor `c_i / b_i`; the active set is the longest
/// prefix whose water level `(Q + sum floors) / |set|` clears every floor.
pub fn alloc_sum_se_waterfilling(problem: &AllocationProblem) -> PowerAllocation {
    let floors: Vec<f64> = problem.costs.iter().zip(&problem.gains).map(|(c, b)| c / b).collect();
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| floors[a].total_cmp(&floors[b]).then(a.cmp(&b)));

    let mut level = f64::NAN;
    let mut prefix = 0.0;
    for (count, &i) in order.iter().enumerate() {
        let candidate = (problem.budget + prefix + floors[i]) / (count + 1) as f64;
        if candidate <= floors[i] {
            break;
        }
        prefix += floors[i];
        level = candidate;
    }
    let powers = problem
        .costs
        .iter()
        .zip(&floors)
        .map(|(c, f)| if level > *f { (level - f) / c } else { 0.0 })
        .collect();
    PowerAllocation::new(problem, powers, level * LN_2)
}

/// `U = -1 / x`: `rho_i = Q / (sqrt(b_i c_i) sum_k sqrt(c_k / b_k))`.
pub fn alloc_harmonic_mean(problem: &AllocationProblem) -> PowerAllocation {
    let total: f64 = problem.costs.iter().zip(&problem.gains).map(|(c, b)| (c / b).sqrt()).sum();
    let powers = problem
        .costs
        .iter()
        .zip(&problem.gains)
        .map(|(c, b)| problem.budget / ((b * c).sqrt() * total))
        .collect();
    let root = problem.budget / total;
    PowerAllocation::new(problem, powers, root * root)
}

/// Closed-form allocation for a named utility; `None` for custom utilities.
pub fn closed_form_allocation(problem: &AllocationProblem, utility: &UtilityKind) -> Option<PowerAllocation> {
    match utility {
        UtilityKind::ProportionalFairness => Some(alloc_proportional_fairness(problem)),
        UtilityKind::SumSe => Some(alloc_sum_se_waterfilling(problem)),
        UtilityKind::HarmonicMean => Some(alloc_harmonic_mean(problem)),
        UtilityKind::Custom(_) => None,
    }
}

/// Exhaustive search over physical powers on a grid of pitch `grid_step`
/// with the whole budget spent; the last user takes the remainder. Ties keep
/// the lexicographically first grid point. Intended as a test oracle.
pub fn brute_force_allocation(
    problem: &AllocationProblem,
    utility: &UtilityKind,
    grid_step: f64,
) -> Result<PowerAllocation> {
    let k = problem.users();
    if k > 4 {
        return Err(Error::TooManyUsersForOracle(k));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidProblem(format!("grid step must be positive, got {grid_step}")));
    }
    if utility.value(1.0).is_none() {
        return Err(Error::OracleNeedsUtilityValue);
    }
    let budget = problem.budget;
    let ticks = (budget / grid_step).floor() as usize;
    let score = |q: &[f64]| -> f64 {
        q.iter()
            .enumerate()
            .map(|(i, qi)| utility.value(qi / problem.costs[i] * problem.gains[i]).unwrap_or(f64::NAN))
            .sum()
    };

    // best point with the first coordinate fixed at `first` ticks
    let search = |first: usize| -> (f64, Vec<f64>) {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut visit = |point: &[f64]| {
            let s = score(point);
            if best.1.is_empty() || s > best.0 {
                best = (s, point.to_vec());
            }
        };
        let mut point = vec![0.0; k];
        if k == 1 {
            point[0] = budget;
            visit(&point);
        } else {
            point[0] = first as f64 * grid_step;
            let left = budget - point[0];
            enumerate_rest(&mut point, 1, left, grid_step, &mut visit);
        }
        best
    };

    let firsts = if k == 1 { 0 } else { ticks };
    let (_, best) = (0..=firsts)
        .into_par_iter()
        .map(|first| (first, search(first)))
        .reduce_with(|a, b| {
            let ((ia, (sa, _)), (ib, (sb, _))) = (&a, &b);
            match sa.partial_cmp(sb) {
                Some(Ordering::Greater) => a,
                Some(Ordering::Less) => b,
                _ => if ia <= ib { a } else { b },
            }
        })
        .map(|(_, best)| best)
        .expect("grid has at least one point");

    let powers = best.iter().zip(&problem.costs).map(|(q, c)| q / c).collect();
    Ok(PowerAllocation::new(problem, powers, f64::NAN))
}

fn enumerate_rest(q: &mut [f64], at: usize, left: f64, step: f64, visit: &mut impl FnMut(&[f64])) {
    if at == q.len() - 1 {
        q[at] = left.max(0.0);
        visit(q);
        return;
    }
    let ticks = (left / step + 1e-9).floor() as usize;
    for t in 0..=ticks {
        q[at] = (t as f64 * step).min(left);
        enumerate_rest(q, at + 1, left - q[at], step, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn problem(b: &[f64], c: &[f64], q: f64) -> AllocationProblem {
        AllocationProblem::new(b.to_vec(), c.to_vec(), q).unwrap()
    }

    #[test]
    fn proportional_fairness_examples() {
        let p = problem(&[1.0; 5], &[1.0; 5], 10.0);
        let a = alloc_proportional_fairness(&p);
        assert!(a.powers.iter().all(|&r| r == 2.0));
        assert_eq!(a.multiplier, 2.0);

        let p = problem(&[0.3, 0.9], &[1.0, 4.0], 10.0);
        let a = alloc_proportional_fairness(&p);
        assert_eq!(a.powers, vec![5.0, 1.25]);
        assert_eq!(a.physical_powers(&p), vec![5.0, 5.0]);
        let other = alloc_proportional_fairness(&problem(&[0.01, 1.0], &[1.0, 4.0], 10.0));
        assert_eq!(a.powers, other.powers);
    }

    #[test]
    fn waterfilling_examples() {
        let p = problem(&[1.0, 1.0], &[1.0, 1.0], 2.0);
        let a = alloc_sum_se_waterfilling(&p);
        assert_eq!(a.powers, vec![1.0, 1.0]);
        assert_eq!(a.sinrs, vec![1.0, 1.0]);

        let p = problem(&[1.0, 0.25], &[1.0, 1.0], 1.0);
        let a = alloc_sum_se_waterfilling(&p);
        assert_eq!(a.powers, vec![1.0, 0.0]);
        assert_relative_eq!(a.multiplier / LN_2, 2.0);

        let p = problem(&[1.0, 1e-6], &[1.0, 50.0], 5.0);
        assert_eq!(alloc_sum_se_waterfilling(&p).powers[1], 0.0);
    }

    #[test]
    fn waterfilling_matches_grid_oracle() {
        let p = problem(&[1.0, 0.25], &[1.0, 1.0], 1.0);
        let oracle = brute_force_allocation(&p, &UtilityKind::SumSe, 1e-4).unwrap();
        assert_abs_diff_eq!(oracle.powers[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(oracle.powers[1], 0.0, epsilon = 1e-4);

        let p = problem(&[1.0, 0.1], &[1.0, 1.0], 2.0);
        let exact = solve_allocation(&p, &UtilityKind::SumSe).unwrap();
        let oracle = brute_force_allocation(&p, &UtilityKind::SumSe, 1e-4).unwrap();
        let ue = exact.utility(&UtilityKind::SumSe).unwrap();
        let uo = oracle.utility(&UtilityKind::SumSe).unwrap();
        assert!(ue >= uo - 1e-12 && ue - uo < 1e-3, "{ue} vs {uo}");
    }

    #[test]
    fn harmonic_examples() {
        let p = problem(&[1.0; 4], &[1.0; 4], 3.0);
        assert!(alloc_harmonic_mean(&p).powers.iter().all(|&r| (r - 0.75).abs() < 1e-15));

        let p = problem(&[1.0, 4.0], &[1.0, 1.0], 3.0);
        let a = alloc_harmonic_mean(&p);
        assert_relative_eq!(a.powers[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(a.powers[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(a.spent(&p), 3.0, epsilon = 1e-15);

        let p = problem(&[0.25, 1.0], &[1.0, 1.0], 3.0);
        let scaled = problem(&[0.25, 1.0], &[1.0, 1.0], 6.0);
        let (a, b) = (alloc_harmonic_mean(&p), alloc_harmonic_mean(&scaled));
        for (x, y) in a.powers.iter().zip(&b.powers) {
            assert_relative_eq!(2.0 * x, *y, epsilon = 1e-15);
        }
    }

    #[test]
    fn harmonic_matches_grid_oracle() {
        let p = problem(&[1.0, 4.0], &[1.0, 1.0], 3.0);
        let oracle = brute_force_allocation(&p, &UtilityKind::HarmonicMean, 1e-3).unwrap();
        assert_abs_diff_eq!(oracle.powers[0], 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(oracle.powers[1], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn oracle_pf_splits_evenly() {
        let p = problem(&[0.5, 0.9], &[3.0, 0.2], 2.0);
        let oracle = brute_force_allocation(&p, &UtilityKind::ProportionalFairness, 1e-3).unwrap();
        for q in oracle.physical_powers(&p) {
            assert_abs_diff_eq!(q, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn oracle_guards() {
        let p = problem(&[1.0; 5], &[1.0; 5], 1.0);
        assert!(matches!(
            brute_force_allocation(&p, &UtilityKind::SumSe, 0.1),
            Err(Error::TooManyUsersForOracle(5))
        ));
        let p = problem(&[1.0], &[1.0], 1.0);
        let custom = UtilityKind::Custom(CustomUtility {
            derivative_inverse: Arc::new(|y| 1.0 / y),
            value: None,
        });
        assert!(matches!(brute_force_allocation(&p, &custom, 0.1), Err(Error::OracleNeedsUtilityValue)));
        let single = brute_force_allocation(&p, &UtilityKind::SumSe, 0.3).unwrap();
        assert_eq!(single.powers, vec![1.0]);
    }

    #[test]
    fn oracle_ties_prefer_first_point() {
        // symmetric problem on a grid that cannot hit the optimum: two mirror points tie
        let p = problem(&[1.0, 1.0], &[1.0, 1.0], 1.5);
        let a = brute_force_allocation(&p, &UtilityKind::SumSe, 0.5).unwrap();
        assert_eq!(a.physical_powers(&p), vec![0.5, 1.0]);
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(AllocationProblem::new(vec![1.0, 0.0], vec![1.0, 1.0], 1.0), Err(Error::ZeroGain { index: 1 })));
        assert!(AllocationProblem::new(vec![1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![f64::INFINITY], vec![1.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![1.0], vec![0.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![1.0], vec![1.0], 0.0).is_err());
        assert!(AllocationProblem::new(vec![], vec![], 1.0).is_err());
    }

    #[test]
    fn custom_utility_uses_generic_path() {
        // U(x) = 2 sqrt(x): U'(x) = 1 / sqrt(x), U'^-1(y) = 1 / y^2
        let custom = UtilityKind::Custom(CustomUtility {
            derivative_inverse: Arc::new(|y| 1.0 / (y * y)),
            value: Some(Arc::new(|x: f64| 2.0 * x.sqrt())),
        });
        let p = problem(&[1.0, 0.5, 0.2], &[1.0, 2.0, 3.0], 4.0);
        let a = solve_allocation(&p, &custom).unwrap();
        assert_relative_eq!(a.spent(&p), 4.0, max_relative = 1e-12);
        // rho_i = nu^2 b_i / c_i^2, so q_i is proportional to b_i / c_i
        let q = a.physical_powers(&p);
        let ratios = [1.0, 0.25, 0.2 / 3.0];
        let total: f64 = ratios.iter().sum();
        for (qi, r) in q.iter().zip(ratios) {
            assert_relative_eq!(*qi, 4.0 * r / total, max_relative = 1e-10);
        }
        let oracle = brute_force_allocation(&p, &custom, 1e-2).unwrap();
        assert!(a.utility(&custom).unwrap() >= oracle.utility(&custom).unwrap() - 1e-12);
    }

    #[test]
    fn bounded_derivative_inverse_cannot_bind() {
        let capped = UtilityKind::Custom(CustomUtility {
            derivative_inverse: Arc::new(|y: f64| (1.0 / y).min(1.0)),
            value: None,
        });
        let p = problem(&[1.0, 1.0], &[1.0, 1.0], 10.0);
        assert!(matches!(solve_allocation(&p, &capped), Err(Error::NonBindingBudget)));
    }

    fn random_problem() -> impl Strategy<Value = AllocationProblem> {
        (1usize..=16).prop_flat_map(|k| {
            (
                proptest::collection::vec(1e-3f64..1.0, k),
                proptest::collection::vec(0.1f64..100.0, k),
                0.1f64..1000.0,
            )
                .prop_map(|(b, c, q)| AllocationProblem::new(b, c, q).unwrap())
        })
    }

    proptest! {
        #[test]
        fn generic_matches_closed_forms(p in random_problem()) {
            for utility in UtilityKind::NAMED {
                let generic = solve_allocation(&p, &utility).unwrap();
                let closed = closed_form_allocation(&p, &utility).unwrap();
                for (g, c) in generic.powers.iter().zip(&closed.powers) {
                    prop_assert!((g - c).abs() <= 1e-8 * c.abs().max(1e-300) || (*g == 0.0 && *c == 0.0),
                        "{}: {} vs {}", utility.name(), g, c);
                }
                let spent = closed.spent(&p);
                prop_assert!((spent - p.budget()).abs() <= 1e-8 * p.budget());
                prop_assert!((generic.spent(&p) - p.budget()).abs() <= 1e-8 * p.budget());
            }
        }

        #[test]
        fn kkt_stationarity(p in random_problem()) {
            for utility in UtilityKind::NAMED {
                let a = closed_form_allocation(&p, &utility).unwrap();
                let nu = a.multiplier;
                for i in 0..p.users() {
                    let (b, c) = (p.gains()[i], p.costs()[i]);
                    if a.powers[i] > 0.0 {
                        let marginal = utility.derivative(a.sinrs[i]).unwrap() * b / c;
                        prop_assert!((marginal - 1.0 / nu).abs() <= 1e-6 / nu);
                    } else {
                        // clipped: even the first unit of power is worth less than 1/nu
                        prop_assert!(utility.derivative(0.0).unwrap() * b / c <= 1.0 / nu * (1.0 + 1e-12));
                    }
                }
            }
        }

        #[test]
        fn waterfilling_is_scale_equivariant(p in random_problem(), t in 0.01f64..100.0) {
            let scaled = AllocationProblem::new(
                p.gains().to_vec(),
                p.costs().iter().map(|c| c * t).collect(),
                p.budget() * t,
            ).unwrap();
            let a = alloc_sum_se_waterfilling(&p);
            let b = alloc_sum_se_waterfilling(&scaled);
            for (x, y) in a.powers.iter().zip(&b.powers) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12));
            }
        }
    }
}
