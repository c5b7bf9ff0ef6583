//! Signed impact matrix and total (walk-summed) influence.
//!
//! Nodes are the indicators in ascending id order followed by the targeted
//! indicators in ascending id order. `A[u][v]` is the aggregated direct
//! estimate of `u` on `v`; the total influence `T = A + A² + … + A^K` sums
//! the weight products of every walk of length `1..=K`. When the series
//! converges its limit is `(I − A)⁻¹ − I`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domain::{aggregate_estimates, ensure_valid, NodeId, Project};
use crate::error::{Error, Result};
use crate::linalg::{Exec, SquareMatrix};

/// Number of squarings used by [`spectral_radius_estimate`]; the estimate
/// is `‖A^64‖_∞^(1/64)`.
pub const RADIUS_SQUARINGS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactMatrix {
    node_order: Vec<NodeId>,
    indicator_count: usize,
    weights: SquareMatrix,
    /// Edges whose experts disagree on the sign.
    conflicts: Vec<(NodeId, NodeId)>,
}

impl ImpactMatrix {
    /// Wraps an explicit weight matrix after checking the sink and diagonal
    /// invariants.
    pub fn from_weights(
        node_order: Vec<NodeId>,
        indicator_count: usize,
        weights: SquareMatrix,
    ) -> Result<Self> {
        if weights.dim() != node_order.len() || indicator_count > node_order.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} nodes, {} indicators, {}x{} weights",
                node_order.len(),
                indicator_count,
                weights.dim(),
                weights.dim()
            )));
        }
        for (u, row) in weights.rows().enumerate() {
            if row[u] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {u}")));
            }
            if u >= indicator_count && row.iter().any(|&w| w != 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "target row `{}` is not zero",
                    node_order[u]
                )));
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidMatrix(format!("non-finite weight in row {u}")));
            }
        }
        Ok(Self {
            node_order,
            indicator_count,
            weights,
            conflicts: Vec::new(),
        })
    }

    pub fn node_order(&self) -> &[NodeId] {
        &self.node_order
    }

    pub fn indicator_count(&self) -> usize {
        self.indicator_count
    }

    pub fn target_count(&self) -> usize {
        self.node_order.len() - self.indicator_count
    }

    pub fn weights(&self) -> &SquareMatrix {
        &self.weights
    }

    pub fn conflicts(&self) -> &[(NodeId, NodeId)] {
        &self.conflicts
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_order.iter().position(|n| n.as_str() == id)
    }

    pub fn weight(&self, source: &str, sink: &str) -> Option<f64> {
        Some(self.weights.get(self.index_of(source)?, self.index_of(sink)?))
    }

    /// Series length covering every simple path.
    pub fn default_series_length(&self) -> usize {
        self.node_order.len().max(1)
    }
}

/// Aggregates the project's estimates into the impact matrix.
pub fn build_matrix(project: &Project) -> Result<ImpactMatrix> {
    ensure_valid(project)?;
    let node_order = project.node_order();
    let index: BTreeMap<&str, usize> = node_order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut grouped: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for e in &project.estimates {
        let key = (index[e.source.as_str()], index[e.sink.as_str()]);
        grouped.entry(key).or_default().push(e.value);
    }

    let mut weights = SquareMatrix::zeros(node_order.len());
    let mut conflicts = Vec::new();
    for ((u, v), values) in grouped {
        let agg = aggregate_estimates(&values, project.aggregation)?;
        weights.set(u, v, agg.weight);
        if agg.conflict {
            conflicts.push((node_order[u].clone(), node_order[v].clone()));
        }
    }

    Ok(ImpactMatrix {
        indicator_count: project.indicators.len(),
        node_order,
        weights,
        conflicts,
    })
}

/// `‖A^64‖_∞^(1/64)` by six squarings, renormalizing after each one so the
/// powers neither overflow nor underflow. Bounds ρ(A) from above and tends
/// to it as the power grows.
pub fn spectral_radius_estimate(a: &SquareMatrix) -> f64 {
    let mut power = a.clone();
    // a^(2^j) = power · exp(log_scale)
    let mut log_scale = 0.0f64;
    for _ in 0..RADIUS_SQUARINGS {
        let norm = power.norm_inf();
        if norm == 0.0 {
            return 0.0;
        }
        power.scale(1.0 / norm);
        log_scale += norm.ln();
        power = power.mul(&power, Exec::Sequential);
        log_scale *= 2.0;
    }
    let norm = power.norm_inf();
    if norm == 0.0 {
        return 0.0;
    }
    ((norm.ln() + log_scale) / f64::from(1u32 << RADIUS_SQUARINGS)).exp()
}

/// `Σ_{k=1..K} A^k`, accumulated in increasing power order.
pub fn walk_sum(a: &SquareMatrix, max_len: usize, exec: Exec) -> Result<SquareMatrix> {
    if max_len == 0 {
        return Err(Error::ZeroSeriesLength);
    }
    let mut power = a.clone();
    let mut total = a.clone();
    for _ in 1..max_len {
        power = power.mul(a, exec);
        if power.is_zero() {
            break;
        }
        total.add_assign(&power);
    }
    Ok(total)
}

/// `(I − A)⁻¹ − I` via a dense LU solve. Requires the radius estimate to be
/// below one.
pub fn resolvent_sum(a: &SquareMatrix) -> Result<SquareMatrix> {
    let radius = spectral_radius_estimate(a);
    if radius.is_nan() || radius >= 1.0 {
        return Err(Error::Convergence { radius });
    }
    let dim = a.dim();
    let system = SquareMatrix::identity(dim).sub(a).to_nalgebra();
    let lu = system.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular);
    }
    let inverse = lu
        .solve(&nalgebra::DMatrix::identity(dim, dim))
        .ok_or(Error::Singular)?;
    let inverse = SquareMatrix::from_nalgebra(&inverse);
    if inverse.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(inverse.sub(&SquareMatrix::identity(dim)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfluenceMethod {
    Series { k: usize },
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceMatrix {
    node_order: Vec<NodeId>,
    indicator_count: usize,
    totals: SquareMatrix,
    method: InfluenceMethod,
    rho_estimate: f64,
}

impl InfluenceMatrix {
    pub fn node_order(&self) -> &[NodeId] {
        &self.node_order
    }

    pub fn indicator_count(&self) -> usize {
        self.indicator_count
    }

    pub fn totals(&self) -> &SquareMatrix {
        &self.totals
    }

    pub fn method(&self) -> InfluenceMethod {
        self.method
    }

    pub fn rho_estimate(&self) -> f64 {
        self.rho_estimate
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_order.iter().position(|n| n.as_str() == id)
    }

    pub fn total(&self, source: &str, sink: &str) -> Option<f64> {
        Some(self.totals.get(self.index_of(source)?, self.index_of(sink)?))
    }
}

fn zero_target_rows(m: &mut SquareMatrix, indicator_count: usize) {
    for row in indicator_count..m.dim() {
        m.fill_row(row, 0.0);
    }
}

pub fn total_influence_series(a: &ImpactMatrix, max_len: usize) -> Result<InfluenceMatrix> {
    total_influence_series_with(a, max_len, Exec::default())
}

pub fn total_influence_series_with(
    a: &ImpactMatrix,
    max_len: usize,
    exec: Exec,
) -> Result<InfluenceMatrix> {
    let mut totals = walk_sum(&a.weights, max_len, exec)?;
    zero_target_rows(&mut totals, a.indicator_count);
    Ok(InfluenceMatrix {
        node_order: a.node_order.clone(),
        indicator_count: a.indicator_count,
        totals,
        method: InfluenceMethod::Series { k: max_len },
        rho_estimate: spectral_radius_estimate(&a.weights),
    })
}

pub fn total_influence_closed(a: &ImpactMatrix) -> Result<InfluenceMatrix> {
    let mut totals = resolvent_sum(&a.weights)?;
    // Target rows of (I − A)⁻¹ − I are exactly zero; LU rounding is not.
    zero_target_rows(&mut totals, a.indicator_count);
    Ok(InfluenceMatrix {
        node_order: a.node_order.clone(),
        indicator_count: a.indicator_count,
        totals,
        method: InfluenceMethod::ClosedForm,
        rho_estimate: spectral_radius_estimate(&a.weights),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ImpactEstimate, Indicator, PermittedRange, TargetIndicator};

    // Independent oracle: depth-first enumeration of every walk.
    fn walk_oracle(a: &SquareMatrix, max_len: usize) -> SquareMatrix {
        fn visit(a: &SquareMatrix, start: usize, at: usize, prod: f64, depth: usize, max_len: usize, out: &mut SquareMatrix) {
            if depth == max_len {
                return;
            }
            for next in 0..a.dim() {
                let w = a.get(at, next);
                if w != 0.0 {
                    let p = prod * w;
                    out.set(start, next, out.get(start, next) + p);
                    visit(a, start, next, p, depth + 1, max_len, out);
                }
            }
        }
        let mut out = SquareMatrix::zeros(a.dim());
        for start in 0..a.dim() {
            visit(a, start, start, 1.0, 0, max_len, &mut out);
        }
        out
    }

    pub(crate) fn chain_project() -> Project {
        let mut p = Project::new("chain");
        p.indicators = vec![Indicator::quantitative("a", 5.0), Indicator::quantitative("b", 5.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![
            PermittedRange::interval("a", 3.0, 7.0),
            PermittedRange::interval("b", 3.0, 7.0),
        ];
        p.estimates = vec![
            ImpactEstimate::new("e1", "a", "b", 0.5),
            ImpactEstimate::new("e1", "b", "t", 0.4),
            ImpactEstimate::new("e1", "a", "t", 0.2),
        ];
        p
    }

    fn single_edge_project(w: f64) -> Project {
        let mut p = Project::new("edge");
        p.indicators = vec![Indicator::quantitative("a", 1.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![PermittedRange::interval("a", 0.0, 2.0)];
        p.estimates = vec![ImpactEstimate::new("e1", "a", "t", w)];
        p
    }

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn build_matrix_places_single_edge() {
        let a = build_matrix(&single_edge_project(0.4)).unwrap();
        assert_eq!(a.weights(), &m(&[&[0.0, 0.4], &[0.0, 0.0]]));
        assert_eq!(a.node_order(), &["a".into(), "t".into()]);
    }

    #[test]
    fn build_matrix_averages_experts() {
        let mut p = single_edge_project(0.2);
        p.estimates.push(ImpactEstimate::new("e2", "a", "t", 0.6));
        let a = build_matrix(&p).unwrap();
        assert!((a.weight("a", "t").unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn build_matrix_flags_conflicts() {
        let mut p = single_edge_project(0.5);
        p.estimates.push(ImpactEstimate::new("e2", "a", "t", -0.5));
        let a = build_matrix(&p).unwrap();
        assert_eq!(a.conflicts(), &[("a".into(), "t".into())]);
    }

    #[test]
    fn build_matrix_without_estimates_is_zero() {
        let mut p = single_edge_project(0.5);
        p.estimates.clear();
        assert!(build_matrix(&p).unwrap().weights().is_zero());
    }

    #[test]
    fn build_matrix_rejects_invalid_project() {
        let mut p = single_edge_project(0.5);
        p.estimates[0].value = 1.5;
        assert!(matches!(build_matrix(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn node_order_is_indicators_then_targets() {
        let mut p = chain_project();
        p.targets.insert(0, TargetIndicator::new("0_first"));
        p.indicators.reverse();
        let a = build_matrix(&p).unwrap();
        let order: Vec<&str> = a.node_order().iter().map(NodeId::as_str).collect();
        assert_eq!(order, ["a", "b", "0_first", "t"]);
    }

    #[test]
    fn radius_examples() {
        assert_eq!(spectral_radius_estimate(&SquareMatrix::zeros(3)), 0.0);
        let r = spectral_radius_estimate(&m(&[&[0.5]]));
        assert!((r - 0.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn radius_of_strictly_upper_triangular_is_zero() {
        let a = m(&[
            &[0.0, 0.9, -0.7, 1.0],
            &[0.0, 0.0, 0.8, 0.3],
            &[0.0, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        // Oracle: A^dim = 0 certifies nilpotency.
        let mut p = a.clone();
        for _ in 1..a.dim() {
            p = p.mul(&a, Exec::Sequential);
        }
        assert!(p.norm_inf() <= 1e-6);
        let r = spectral_radius_estimate(&a);
        assert!(r <= a.norm_inf().powf(1.0 / 64.0));
        assert!(r <= 1e-6);
    }

    #[test]
    fn radius_is_homogeneous_and_handles_tiny_entries() {
        let a = m(&[&[0.0, 0.8], &[0.5, 0.0]]);
        let r = spectral_radius_estimate(&a);
        let exact = (0.8f64 * 0.5).sqrt();
        assert!((r - exact).abs() < 1e-2, "{r} vs {exact}");
        assert!(r >= exact - 1e-12);
        let tiny = spectral_radius_estimate(&a.scaled(1e-200));
        assert!((tiny / r / 1e-200 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chain_series_matches_walk_oracle() {
        let a = build_matrix(&chain_project()).unwrap();
        let oracle = walk_oracle(a.weights(), 3);
        assert!((oracle.get(0, 2) - 0.4).abs() < 1e-15);
        let t = total_influence_series(&a, 3).unwrap();
        assert!((t.total("a", "t").unwrap() - 0.4).abs() < 1e-15);
        assert!(t.totals().max_abs_diff(&oracle) < 1e-15);
        assert_eq!(t.method(), InfluenceMethod::Series { k: 3 });
    }

    #[test]
    fn single_edge_has_no_compound_walks() {
        let a = build_matrix(&single_edge_project(0.5)).unwrap();
        for k in [1, 2, 7] {
            let t = total_influence_series(&a, k).unwrap();
            assert_eq!(t.totals(), &m(&[&[0.0, 0.5], &[0.0, 0.0]]));
        }
    }

    #[test]
    fn zero_matrix_stays_zero() {
        let a = walk_sum(&SquareMatrix::zeros(4), 5, Exec::default()).unwrap();
        assert!(a.is_zero());
        assert_eq!(walk_sum(&SquareMatrix::zeros(2), 0, Exec::default()), Err(Error::ZeroSeriesLength));
    }

    #[test]
    fn closed_form_examples() {
        let a = m(&[&[0.0, 0.5], &[0.0, 0.0]]);
        assert!(resolvent_sum(&a).unwrap().max_abs_diff(&a) < 1e-15);
        let t = resolvent_sum(&m(&[&[0.5]])).unwrap();
        assert!((t.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_divergent_matrix() {
        let err = resolvent_sum(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::Convergence { radius } if radius >= 1.0));
    }

    #[test]
    fn closed_form_matches_series_on_random_matrix() {
        let mut a = SquareMatrix::zeros(4);
        let mut s: u64 = 42;
        for i in 0..4 {
            for j in 0..4 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                a.set(i, j, (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0);
            }
        }
        let a = a.scaled(0.8 / spectral_radius_estimate(&a));
        assert!((spectral_radius_estimate(&a) - 0.8).abs() < 1e-12);
        let closed = resolvent_sum(&a).unwrap();
        let series = walk_sum(&a, 300, Exec::default()).unwrap();
        assert!(closed.max_abs_diff(&series) <= 1e-9);
    }

    #[test]
    fn target_rows_are_zero_for_both_methods() {
        let a = build_matrix(&chain_project()).unwrap();
        for t in [total_influence_series(&a, 4).unwrap(), total_influence_closed(&a).unwrap()] {
            assert!(t.totals().row(2).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn from_weights_checks_invariants() {
        let order = vec![NodeId::from("a"), NodeId::from("t")];
        assert!(ImpactMatrix::from_weights(order.clone(), 1, m(&[&[0.0, 0.5], &[0.0, 0.0]])).is_ok());
        assert!(ImpactMatrix::from_weights(order.clone(), 1, m(&[&[0.1, 0.5], &[0.0, 0.0]])).is_err());
        assert!(ImpactMatrix::from_weights(order.clone(), 1, m(&[&[0.0, 0.5], &[0.3, 0.0]])).is_err());
        assert!(ImpactMatrix::from_weights(order, 1, SquareMatrix::zeros(3)).is_err());
    }

    #[test]
    fn series_is_deterministic() {
        let a = build_matrix(&chain_project()).unwrap();
        let x = total_influence_series_with(&a, 9, Exec::Sequential).unwrap();
        let y = total_influence_series_with(&a, 9, Exec::Parallel).unwrap();
        assert_eq!(x, y);
    }
}
