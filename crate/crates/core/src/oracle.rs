//! Exact answers on small graphs from the full Markov chain on infected sets.
//!
//! States are vertex masks; the empty mask is absorbing. Every transition
//! changes the number of infected vertices by exactly one, so the generator
//! restricted to nonempty masks is block tridiagonal when masks are grouped
//! by popcount. Expected absorption times are found by block elimination over
//! those levels; transient laws by uniformization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::harris::Configuration;

/// Largest graph accepted by [`exact_expected_extinction`].
pub const MAX_EXPECTATION_VERTICES: usize = 14;
/// Largest graph accepted by the transient routines.
pub const MAX_TRANSIENT_VERTICES: usize = 12;

/// Relative residual accepted from the direct solve.
const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Largest uniformized mass `Λδ` handled in one step; keeps `e^{-Λδ}` far
/// from underflow.
const MAX_STEP_MASS: f64 = 32.0;
/// Smallest per-step truncation error that double precision can certify.
const MIN_STEP_TOLERANCE: f64 = 1e-15;

/// Generator of the contact process on `graph` over masks `0..2^n`.
#[derive(Clone, Debug)]
pub struct ChainModel<'g> {
    graph: &'g Graph,
    lambda: f64,
    neighbor_masks: Vec<u32>,
}

impl<'g> ChainModel<'g> {
    pub fn new(graph: &'g Graph, lambda: f64, cap: usize) -> Result<Self> {
        let n = graph.n_vertices();
        if n > cap {
            return Err(Error::Capacity { n, cap });
        }
        if n == 0 {
            return Err(Error::InvalidSize {
                what: "graph",
                got: 0,
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("infection rate must be finite and >= 0, got {lambda}")));
        }
        let neighbor_masks = (0..n)
            .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
            .collect();
        Ok(ChainModel {
            graph,
            lambda,
            neighbor_masks,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn n_states(&self) -> usize {
        1 << self.graph.n_vertices()
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.graph.n_vertices()) - 1) as u32
    }

    /// Rate of infecting the healthy vertex `y` from `mask`.
    #[inline]
    fn infection_rate(&self, mask: u32, y: usize) -> f64 {
        self.lambda * (self.neighbor_masks[y] & mask).count_ones() as f64
    }

    /// Calls `f(target, rate)` for every transition out of `mask` with a
    /// positive rate.
    #[inline]
    pub fn for_each_transition(&self, mask: u32, mut f: impl FnMut(u32, f64)) {
        let n = self.graph.n_vertices();
        for v in 0..n {
            let bit = 1u32 << v;
            if mask & bit != 0 {
                f(mask & !bit, 1.0);
            } else {
                let r = self.infection_rate(mask, v);
                if r > 0.0 {
                    f(mask | bit, r);
                }
            }
        }
    }

    /// Total rate of leaving `mask`; zero only for the empty mask.
    pub fn exit_rate(&self, mask: u32) -> f64 {
        let mut total = 0.0;
        self.for_each_transition(mask, |_, r| total += r);
        total
    }

    /// Dense generator row of `mask` (diagonal included).
    pub fn generator_row(&self, mask: u32) -> Vec<f64> {
        let mut row = vec![0.0; self.n_states()];
        self.for_each_transition(mask, |to, r| {
            row[to as usize] += r;
            row[mask as usize] -= r;
        });
        row
    }

    /// Uniformization rate `n + 2λm`, an upper bound on every exit rate.
    pub fn uniformization_rate(&self) -> f64 {
        self.graph.n_vertices() as f64 + 2.0 * self.lambda * self.graph.n_edges() as f64
    }
}

/// Masks grouped by popcount with each mask's position inside its level.
struct Levels {
    members: Vec<Vec<u32>>,
    position: Vec<usize>,
}

impl Levels {
    fn new(n: usize) -> Self {
        let mut members = vec![Vec::new(); n + 1];
        let mut position = vec![0; 1 << n];
        for mask in 0..(1u32 << n) {
            let level = &mut members[mask.count_ones() as usize];
            position[mask as usize] = level.len();
            level.push(mask);
        }
        Levels { members, position }
    }
}

/// Expected absorption time from every nonempty mask, indexed by mask
/// (entry 0 is 0).
pub fn expected_absorption_times(model: &ChainModel<'_>) -> Result<Vec<f64>> {
    let n = model.graph.n_vertices();
    let levels = Levels::new(n);
    // Level k unknowns satisfy D_k x_k - R_k x_{k-1} - U_k x_{k+1} = 1, with
    // D diagonal exit rates, R recoveries (rate 1) and U infections. Forward
    // elimination keeps x_k = y_k + G_k x_{k+1}.
    let mut ys: Vec<DVector<f64>> = vec![DVector::zeros(0)];
    let mut gs: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0)];
    for k in 1..=n {
        let here = &levels.members[k];
        let size = here.len();
        let mut s = DMatrix::<f64>::zeros(size, size);
        let mut b = DVector::<f64>::from_element(size, 1.0);
        for (i, &mask) in here.iter().enumerate() {
            s[(i, i)] = model.exit_rate(mask);
            if k > 1 {
                let g_prev = &gs[k - 1];
                let y_prev = &ys[k - 1];
                let mut rest = mask;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    rest &= !bit;
                    let j = levels.position[(mask & !bit) as usize];
                    b[i] += y_prev[j];
                    for c in 0..size {
                        s[(i, c)] -= g_prev[(j, c)];
                    }
                }
            }
        }
        let lu = s.lu();
        let y = lu
            .solve(&b)
            .ok_or_else(|| Error::Defect(format!("singular elimination block at level {k}")))?;
        let g = if k < n {
            let up = &levels.members[k + 1];
            let mut u = DMatrix::<f64>::zeros(size, up.len());
            for (i, &mask) in here.iter().enumerate() {
                for v in 0..n {
                    let bit = 1u32 << v;
                    if mask & bit == 0 {
                        let r = model.infection_rate(mask, v);
                        if r > 0.0 {
                            u[(i, levels.position[(mask | bit) as usize])] = r;
                        }
                    }
                }
            }
            lu.solve(&u)
                .ok_or_else(|| Error::Defect(format!("singular elimination block at level {k}")))?
        } else {
            DMatrix::zeros(size, 0)
        };
        ys.push(y);
        gs.push(g);
    }

    let mut x = vec![0.0; model.n_states()];
    let mut above = DVector::<f64>::zeros(0);
    for k in (1..=n).rev() {
        let xk = if k == n {
            ys[k].clone()
        } else {
            &ys[k] + &gs[k] * &above
        };
        for (i, &mask) in levels.members[k].iter().enumerate() {
            x[mask as usize] = xk[i];
        }
        above = xk;
    }
    check_residual(model, &x)?;
    Ok(x)
}

fn check_residual(model: &ChainModel<'_>, x: &[f64]) -> Result<()> {
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for mask in 1..model.n_states() as u32 {
        let xs = x[mask as usize];
        let mut lhs = 0.0;
        let mut out = 0.0;
        model.for_each_transition(mask, |to, r| {
            out += r;
            lhs += r * (xs - x[to as usize]);
        });
        scale = scale.max(out * xs.abs());
        worst = worst.max((lhs - 1.0).abs());
    }
    if worst <= RESIDUAL_TOLERANCE * scale {
        Ok(())
    } else {
        Err(Error::Defect(format!(
            "absorption-time solve residual {worst:e} exceeds {RESIDUAL_TOLERANCE:e} x {scale:e}"
        )))
    }
}

/// `E[τ]` from full occupancy, by direct solution of the absorption-time
/// equations. At most [`MAX_EXPECTATION_VERTICES`] vertices.
pub fn exact_expected_extinction(g: &Graph, lambda: f64) -> Result<f64> {
    let model = ChainModel::new(g, lambda, MAX_EXPECTATION_VERTICES)?;
    if g.n_vertices() == 1 {
        return Ok(1.0);
    }
    let x = expected_absorption_times(&model)?;
    Ok(x[model.full_mask() as usize])
}

/// Survival function `u_t(S) = P_S[ξ_t ≠ 0]` for every start mask `S` at
/// each requested time (any order), with total truncation error below `tol`
/// at every time.
pub fn survival_tables(model: &ChainModel<'_>, times: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Parameter(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Parameter("times must be finite and >= 0".into()));
    }
    let rate = model.uniformization_rate();
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let t_max = order.last().map_or(0.0, |&i| times[i]);
    let total_steps = (rate * t_max / MAX_STEP_MASS).ceil().max(1.0);
    let step_tol = tol / total_steps;
    if step_tol < MIN_STEP_TOLERANCE {
        return Err(Error::Parameter(format!(
            "tolerance {tol:e} over {total_steps} uniformization steps is below double precision"
        )));
    }

    let states = model.n_states();
    // Jump targets and probabilities of the uniformized chain, per state.
    let mut jumps: Vec<Vec<(u32, f64)>> = Vec::with_capacity(states);
    let mut stay = Vec::with_capacity(states);
    for mask in 0..states as u32 {
        let mut out = Vec::new();
        let mut total = 0.0;
        model.for_each_transition(mask, |to, r| {
            out.push((to, r / rate));
            total += r;
        });
        stay.push(1.0 - total / rate);
        jumps.push(out);
    }
    let apply = |u: &[f64], out: &mut [f64]| {
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = stay[s] * u[s];
            for &(to, p) in &jumps[s] {
                acc += p * u[to as usize];
            }
            *o = acc;
        }
    };

    let mut u: Vec<f64> = (0..states).map(|s| if s == 0 { 0.0 } else { 1.0 }).collect();
    let mut now = 0.0;
    let mut result = vec![Vec::new(); times.len()];
    let mut term = vec![0.0; states];
    let mut next = vec![0.0; states];
    for &i in &order {
        let span = times[i] - now;
        if span > 0.0 {
            let steps = (rate * span / MAX_STEP_MASS).ceil().max(1.0) as usize;
            let mass = rate * span / steps as f64;
            for _ in 0..steps {
                // u <- sum_j Poisson(mass; j) P^j u. Past the mode the tail
                // after term j is at most w_j q / (1 - q), q = mass / (j + 1).
                let mut weight = (-mass).exp();
                term.copy_from_slice(&u);
                let mut acc: Vec<f64> = term.iter().map(|x| weight * x).collect();
                let mut j = 0usize;
                loop {
                    let q = mass / (j + 1) as f64;
                    if q < 1.0 && weight * q / (1.0 - q) < step_tol {
                        break;
                    }
                    j += 1;
                    apply(&term, &mut next);
                    std::mem::swap(&mut term, &mut next);
                    weight *= mass / j as f64;
                    for (a, x) in acc.iter_mut().zip(&term) {
                        *a += weight * x;
                    }
                }
                u = acc;
            }
            now = times[i];
        }
        result[i] = u.clone();
    }
    Ok(result)
}

/// `P[ξ^start_t ≠ 0]` to within `tol`. At most [`MAX_TRANSIENT_VERTICES`]
/// vertices.
pub fn exact_transient_survival(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let model = ChainModel::new(g, lambda, MAX_TRANSIENT_VERTICES)?;
    if start.n_vertices() != g.n_vertices() {
        return Err(Error::Parameter("configuration does not match the graph".into()));
    }
    let table = survival_tables(&model, &[t], tol)?;
    Ok(table[0][start.mask() as usize].clamp(0.0, 1.0))
}

/// `P[τ ≤ t]` from full occupancy at every grid time.
pub fn exact_cdf_extinction(g: &Graph, lambda: f64, t_grid: &[f64], tol: f64) -> Result<Vec<f64>> {
    let model = ChainModel::new(g, lambda, MAX_TRANSIENT_VERTICES)?;
    let full = model.full_mask() as usize;
    Ok(survival_tables(&model, t_grid, tol)?
        .into_iter()
        .map(|u| (1.0 - u[full]).clamp(0.0, 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star, random_tree};

    #[test]
    fn generator_rows_sum_to_zero() {
        let g = random_tree(6, 3).unwrap();
        let m = ChainModel::new(&g, 1.7, 12).unwrap();
        for mask in 0..m.n_states() as u32 {
            let row = m.generator_row(mask);
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
            for (j, r) in row.iter().enumerate() {
                if j != mask as usize {
                    assert!(*r >= 0.0);
                }
            }
        }
        assert!(m.generator_row(0).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn infection_rate_counts_infected_neighbours() {
        let g = make_star(4).unwrap();
        let m = ChainModel::new(&g, 2.0, 12).unwrap();
        let mut to_center = 0.0;
        m.for_each_transition(0b1110, |to, r| {
            if to == 0b1111 {
                to_center = r;
            }
        });
        assert_eq!(to_center, 6.0);
    }

    #[test]
    fn single_vertex_is_exactly_one() {
        let g = make_line(1).unwrap();
        assert_eq!(exact_expected_extinction(&g, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn edge_matches_hand_solution() {
        let g = make_line(2).unwrap();
        for lambda in [0.0, 0.5, 2.0, 7.0] {
            let e = exact_expected_extinction(&g, lambda).unwrap();
            assert!((e - (1.5 + lambda / 2.0)).abs() < 1e-12, "{lambda}: {e}");
        }
    }

    #[test]
    fn zero_rate_is_max_of_exponentials() {
        // Harmonic number H_n.
        let g = make_star(5).unwrap();
        let h: f64 = (1..=5).map(|k| 1.0 / k as f64).sum();
        assert!((exact_expected_extinction(&g, 0.0).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn nondecreasing_in_rate_and_below_crude_bound() {
        let g = random_tree(7, 11).unwrap();
        let mut last = 0.0;
        for lambda in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let e = exact_expected_extinction(&g, lambda).unwrap();
            assert!(e >= last);
            assert!(e <= (7.0 + 2.0 * lambda * 6.0f64).exp());
            last = e;
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let g = make_line(15).unwrap();
        assert_eq!(
            exact_expected_extinction(&g, 1.0),
            Err(Error::Capacity { n: 15, cap: 14 })
        );
        let g = make_line(13).unwrap();
        assert!(matches!(
            exact_cdf_extinction(&g, 1.0, &[1.0], 1e-9),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn single_vertex_survival_is_exponential() {
        let g = make_line(1).unwrap();
        let start = Configuration::full(1);
        for t in [0.0, 0.3, 1.0, 5.0, 40.0] {
            let p = exact_transient_survival(&g, 1.0, &start, t, 1e-12).unwrap();
            assert!((p - (-t as f64).exp()).abs() < 1e-12, "{t}: {p}");
        }
    }

    #[test]
    fn survival_from_nonempty_at_zero_is_one() {
        let g = make_star(4).unwrap();
        let s = Configuration::from_vertices(4, [2]).unwrap();
        assert_eq!(exact_transient_survival(&g, 2.0, &s, 0.0, 1e-9).unwrap(), 1.0);
        let e = Configuration::empty(4);
        assert_eq!(exact_transient_survival(&g, 2.0, &e, 3.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn cdf_is_monotone_and_integrates_to_mean() {
        let g = make_line(3).unwrap();
        let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.02).collect();
        let cdf = exact_cdf_extinction(&g, 1.0, &grid, 1e-11).unwrap();
        assert_eq!(cdf[0], 0.0);
        assert!(cdf.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        // E[τ] = ∫ (1 - F); trapezoid rule on [0, 80] with a negligible tail.
        let integral: f64 = cdf
            .windows(2)
            .map(|w| 0.02 * (2.0 - w[0] - w[1]) / 2.0)
            .sum();
        let mean = exact_expected_extinction(&g, 1.0).unwrap();
        assert!((integral - mean).abs() < 1e-3, "{integral} vs {mean}");
    }

    #[test]
    fn grid_order_does_not_matter() {
        let g = make_star(4).unwrap();
        let a = exact_cdf_extinction(&g, 1.0, &[3.0, 0.5, 2.0], 1e-10).unwrap();
        let b = exact_cdf_extinction(&g, 1.0, &[0.5, 2.0, 3.0], 1e-10).unwrap();
        assert!((a[0] - b[2]).abs() < 1e-9 && (a[1] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn unreachable_tolerance_is_an_error() {
        let g = make_line(3).unwrap();
        assert!(exact_cdf_extinction(&g, 1.0, &[1e6], 1e-12).is_err());
        assert!(exact_cdf_extinction(&g, 1.0, &[1.0], 0.0).is_err());
    }
}
