use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::density::{density_overlap, DensityProfile, DensityQuadrature};
use super::positions::SpinSite;
use crate::optics::{greens_47_nonlocal, greens_nonlocal_terms, local_weight, CavityGeometry, NonlocalTerm};
use crate::gaussint::gauss_1d;
use crate::{Error, Result, Vec2};

/// Per-site Gauss–Hermite settings for the nonlocal part of J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Nodes per axis per site.
    pub nodes: usize,
    /// Nodes per axis of the refined rule used for the convergence check.
    pub check_nodes: usize,
    /// Relative tolerance of the convergence check, measured against
    /// max(|J_ij|, 1e-3 · max |J|).
    pub rtol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes: 24, check_nodes: 32, rtol: 1e-4 }
    }
}

/// Symmetric coupling matrix with its provenance and eigen-decomposition.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub j: DMatrix<f64>,
    pub sites: Vec<SpinSite>,
    pub geom: CavityGeometry,
    pub include_local: bool,
    /// `None` for the point-source matrix.
    pub quadrature: Option<QuadratureConfig>,
    /// Descending.
    pub eigvals: Vec<f64>,
    /// Column k pairs with `eigvals[k]`.
    pub eigvecs: DMatrix<f64>,
    /// Entries (i ≤ j) whose quadrature failed the refinement check.
    pub unconverged: Vec<(usize, usize)>,
}

impl CouplingMatrix {
    /// Wraps an existing symmetric matrix, computing its eigen-decomposition.
    pub fn from_matrix(
        j: DMatrix<f64>,
        sites: Vec<SpinSite>,
        geom: CavityGeometry,
        include_local: bool,
        quadrature: Option<QuadratureConfig>,
    ) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: j.ncols() });
        }
        if n == 0 {
            return Err(Error::EmptyInput("coupling matrix has no sites".into()));
        }
        if !sites.is_empty() && sites.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: sites.len() });
        }
        let scale = j.amax().max(f64::MIN_POSITIVE);
        if (&j - j.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidParameter("coupling matrix is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(j.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigvals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigvecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { j, sites, geom, include_local, quadrature, eigvals, eigvecs, unconverged: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals[0]
    }

    /// FNV-1a hash of the matrix entries, as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in (self.n() as u64).to_le_bytes().into_iter().chain(self.j.iter().flat_map(|v| v.to_le_bytes())) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// J_ij = ∬ ρ_i(r) ρ_j(r′) G^η(r, r′) with the φ = 0 family Green's function:
/// the local part analytically, the nonlocal part by per-site Gauss–Hermite
/// quadrature.
pub fn assemble_j(
    sites: &[SpinSite],
    geom: &CavityGeometry,
    quadrature: &QuadratureConfig,
    include_local: bool,
) -> Result<CouplingMatrix> {
    geom.validate()?;
    if sites.is_empty() {
        return Err(Error::EmptyInput("no spin sites".into()));
    }
    if quadrature.nodes == 0 || quadrature.check_nodes == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node per axis".into()));
    }
    for s in sites {
        s.density.validate()?;
    }
    let terms = greens_nonlocal_terms(geom)?;
    let w0 = geom.w0_um;
    let rules = |nodes: usize| -> Vec<DensityQuadrature> {
        sites.iter().map(|s| s.density.quadrature(s.position, nodes)).collect()
    };
    let coarse = rules(quadrature.nodes);
    let fine = rules(quadrature.check_nodes);
    let n = sites.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut local = 0.0;
            if include_local {
                local = local_weight(geom)
                    * density_overlap(sites[i].position, &sites[i].density, sites[j].position, &sites[j].density);
            }
            let a = local + nonlocal_quadrature(&coarse[i], &coarse[j], &terms, w0);
            let b = local + nonlocal_quadrature(&fine[i], &fine[j], &terms, w0);
            (a, b)
        })
        .collect();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for (&(a, b), &(v, _)) in pairs.iter().zip(&values) {
        j[(a, b)] = v;
        j[(b, a)] = v;
    }
    let floor = 1e-3 * j.amax();
    let unconverged: Vec<(usize, usize)> = pairs
        .iter()
        .zip(&values)
        .filter(|(_, &(v, r))| (v - r).abs() > quadrature.rtol * r.abs().max(floor))
        .map(|(&p, _)| p)
        .collect();
    if !unconverged.is_empty() {
        log::warn!("assemble_j: {} entries failed the quadrature refinement check", unconverged.len());
    }
    let mut m = CouplingMatrix::from_matrix(j, sites.to_vec(), geom.clone(), include_local, Some(*quadrature))?;
    m.unconverged = unconverged;
    Ok(m)
}

/// Σ over the nonlocal terms of ∬ ρ_i ρ_j · term, with separable kernels.
fn nonlocal_quadrature(qi: &DensityQuadrature, qj: &DensityQuadrature, terms: &[NonlocalTerm], w0: f64) -> f64 {
    let (na, nb) = (qi.x.len(), qi.y.len());
    let (nc, nd) = (qj.x.len(), qj.y.len());
    let mut total = 0.0;
    for term in terms {
        let (beta, gamma) = term.beta_gamma(w0);
        let kernel = |u: f64, v: f64| Complex64::from_polar(1.0, beta * (u * u + v * v) - gamma * u * v);
        // T = W_i K_y W_jᵀ, then Σ_ac K_x[a,c] T[a,c].
        let ky: Vec<Complex64> = (0..nb).flat_map(|b| (0..nd).map(move |d| (b, d))).map(|(b, d)| kernel(qi.y[b], qj.y[d])).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut row = vec![Complex64::new(0.0, 0.0); nd];
        for a in 0..na {
            row.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for b in 0..nb {
                let w = qi.w[a * nb + b];
                if w == 0.0 {
                    continue;
                }
                for d in 0..nd {
                    row[d] += w * ky[b * nd + d];
                }
            }
            for c in 0..nc {
                let mut t = Complex64::new(0.0, 0.0);
                for d in 0..nd {
                    t += row[d] * qj.w[c * nd + d];
                }
                sum += kernel(qi.x[a], qj.x[c]) * t;
            }
        }
        total += term.weight * (Complex64::from_polar(1.0, term.phase) * sum).im;
    }
    total
}

/// ∬ g_i(x) g_j(x′) e^{i(β(x² + x′²) − γ x x′)} dx dx′ for normalized 1D
/// Gaussians g_i, g_j, by two sequential complex Gaussian integrals.
fn axis_integral(xi: f64, si: f64, xj: f64, sj: f64, beta: f64, gamma: f64) -> Complex64 {
    let i = Complex64::i();
    let a1 = Complex64::new(1.0 / (2.0 * sj * sj), -beta);
    let b0 = Complex64::new(xj / (sj * sj), 0.0);
    let c1 = Complex64::new(-xj * xj / (2.0 * sj * sj), 0.0);
    // Inner integral: sqrt(π/a1) exp((b0 − iγx)²/(4 a1) + c1), a Gaussian in x.
    let a2 = Complex64::new(1.0 / (2.0 * si * si), -beta) + gamma * gamma / (4.0 * a1);
    let b2 = Complex64::new(xi / (si * si), 0.0) - i * gamma * b0 / (2.0 * a1);
    let c2 = Complex64::new(-xi * xi / (2.0 * si * si), 0.0) + b0 * b0 / (4.0 * a1) + c1;
    let norm = 1.0 / (2.0 * PI * si * sj);
    norm * (PI / a1).sqrt() * gauss_1d(a2, b2, c2)
}

/// Closed-form nonlocal coupling between two pure-Gaussian densities
/// (HG00 component only).
pub fn gaussian_pair_nonlocal(ci: Vec2, di: &DensityProfile, cj: Vec2, dj: &DensityProfile, geom: &CavityGeometry) -> Result<f64> {
    let terms = greens_nonlocal_terms(geom)?;
    let mut total = 0.0;
    for term in &terms {
        let (beta, gamma) = term.beta_gamma(geom.w0_um);
        let ix = axis_integral(ci[0], di.sigma_x, cj[0], dj.sigma_x, beta, gamma);
        let iy = axis_integral(ci[1], di.sigma_y, cj[1], dj.sigma_y, beta, gamma);
        total += term.weight * (Complex64::from_polar(1.0, term.phase) * ix * iy).im;
    }
    Ok(total * di.a00 * dj.a00)
}

/// Point-source couplings: the nonlocal Green's function evaluated at the trap
/// centers with the diagonal removed.
pub fn point_source_j(sites: &[SpinSite], geom: &CavityGeometry) -> Result<CouplingMatrix> {
    if geom.n != 7 {
        return Err(Error::UnsupportedGeometry(format!(
            "point-source couplings use the N = 7 closed form, got N = {}",
            geom.n
        )));
    }
    let n = sites.len();
    if n == 0 {
        return Err(Error::EmptyInput("no spin sites".into()));
    }
    let j = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            0.0
        } else if a < b {
            greens_47_nonlocal(sites[a].position, sites[b].position, geom)
        } else {
            greens_47_nonlocal(sites[b].position, sites[a].position, geom)
        }
    });
    CouplingMatrix::from_matrix(j, sites.to_vec(), geom.clone(), false, None)
}

#[cfg(test)]
mod tests {
    use super::super::positions::j1_fixture;
    use super::*;

    fn geom() -> CavityGeometry {
        CavityGeometry::four_seven()
    }

    fn site(x: f64, y: f64, sx: f64, sy: f64) -> SpinSite {
        SpinSite { position: [x, y], density: DensityProfile::gaussian(sx, sy) }
    }

    #[test]
    fn point_sites_at_origin() {
        let g = geom();
        let s = vec![site(0.0, 0.0, 1.0, 1.0); 2];
        let p = point_source_j(&s, &g).unwrap();
        assert!((p.j[(0, 1)] - 3.0 / PI).abs() < 1e-14);
        assert_eq!(p.j[(0, 0)], 0.0);
        // Narrow densities approach one seventh of the point-source value.
        let tiny = vec![site(0.0, 0.0, 1e-3, 1e-3); 2];
        let m = assemble_j(&tiny, &g, &QuadratureConfig::default(), false).unwrap();
        assert!((m.j[(0, 1)] - 3.0 / (7.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn single_site_local_term() {
        let g = geom();
        let sigma = 5.0;
        let s = vec![site(0.0, 0.0, sigma, sigma)];
        let with = assemble_j(&s, &g, &QuadratureConfig::default(), true).unwrap();
        let without = assemble_j(&s, &g, &QuadratureConfig::default(), false).unwrap();
        let local = with.j[(0, 0)] - without.j[(0, 0)];
        let expect = g.w0_um.powi(2) / (56.0 * PI * sigma * sigma);
        assert!((local - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn quadrature_matches_closed_form_on_j1() {
        let g = geom();
        let sites: Vec<SpinSite> = j1_fixture().into_iter().map(|s| site(s.position[0], s.position[1], 5.3, 5.3)).collect();
        let m = assemble_j(&sites, &g, &QuadratureConfig::default(), false).unwrap();
        assert!(m.unconverged.is_empty());
        let scale = m.j.amax();
        for a in 0..16 {
            for b in 0..16 {
                let c = gaussian_pair_nonlocal(sites[a].position, &sites[a].density, sites[b].position, &sites[b].density, &g).unwrap();
                assert!((m.j[(a, b)] - c).abs() < 1e-9 * scale, "({a},{b}) {} vs {c}", m.j[(a, b)]);
            }
        }
    }

    #[test]
    fn closed_form_matches_brute_force_double_sum() {
        let g = geom();
        let (di, dj) = (DensityProfile::gaussian(5.2, 5.4), DensityProfile::gaussian(4.0, 6.0));
        let (ci, cj) = ([-60.0, 35.0], [80.0, -20.0]);
        let closed = gaussian_pair_nonlocal(ci, &di, cj, &dj, &g).unwrap();
        // Separable brute-force sum on a fine uniform grid, per term and axis.
        let h = 0.1;
        let axis = |x0: f64, s0: f64, x1: f64, s1: f64, beta: f64, gamma: f64| {
            let pts = |c: f64, s: f64| -> Vec<(f64, f64)> {
                (-80..=80)
                    .map(|k| {
                        let x = c + k as f64 * h * s;
                        (x, (-(x - c).powi(2) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s) * h * s)
                    })
                    .collect()
            };
            let (p0, p1) = (pts(x0, s0), pts(x1, s1));
            let mut acc = Complex64::new(0.0, 0.0);
            for &(u, wu) in &p0 {
                for &(v, wv) in &p1 {
                    acc += wu * wv * Complex64::from_polar(1.0, beta * (u * u + v * v) - gamma * u * v);
                }
            }
            acc
        };
        let mut brute = 0.0;
        for t in greens_nonlocal_terms(&g).unwrap() {
            let (beta, gamma) = t.beta_gamma(g.w0_um);
            let ix = axis(ci[0], di.sigma_x, cj[0], dj.sigma_x, beta, gamma);
            let iy = axis(ci[1], di.sigma_y, cj[1], dj.sigma_y, beta, gamma);
            brute += t.weight * (Complex64::from_polar(1.0, t.phase) * ix * iy).im;
        }
        assert!((closed - brute).abs() < 1e-8, "{closed} vs {brute}");
    }

    #[test]
    fn full_matrix_is_positive_semidefinite_and_symmetric() {
        let g = geom();
        let sites = j1_fixture();
        let m = assemble_j(&sites, &g, &QuadratureConfig::default(), true).unwrap();
        assert_eq!(m.j, m.j.transpose());
        let tol = 1e-8 * m.eigvals[0].abs();
        assert!(*m.eigvals.last().unwrap() >= -tol, "min eigenvalue {}", m.eigvals.last().unwrap());
        assert!(m.eigvals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn relabeling_permutes_the_matrix() {
        let g = geom();
        let sites = j1_fixture();
        let perm: Vec<usize> = (0..16).map(|k| (k * 5 + 3) % 16).collect();
        let permuted: Vec<SpinSite> = perm.iter().map(|&k| sites[k]).collect();
        let a = assemble_j(&sites, &g, &QuadratureConfig::default(), true).unwrap();
        let b = assemble_j(&permuted, &g, &QuadratureConfig::default(), true).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                assert!((b.j[(r, c)] - a.j[(perm[r], perm[c])]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rotation_about_the_center_leaves_couplings_unchanged() {
        let g = geom();
        let d = DensityProfile::gaussian(5.3, 5.3);
        let sites: Vec<SpinSite> = j1_fixture().into_iter().map(|s| SpinSite { density: d, ..s }).collect();
        let (s, c) = 0.83f64.sin_cos();
        let rotated: Vec<SpinSite> = sites
            .iter()
            .map(|t| SpinSite { position: [c * t.position[0] - s * t.position[1], s * t.position[0] + c * t.position[1]], density: d })
            .collect();
        let a = assemble_j(&sites, &g, &QuadratureConfig::default(), true).unwrap();
        let b = assemble_j(&rotated, &g, &QuadratureConfig::default(), true).unwrap();
        assert!((a.j - b.j).amax() < 1e-8);
    }

    #[test]
    fn refinement_changes_entries_below_tolerance() {
        let g = geom();
        let sites = j1_fixture();
        let a = assemble_j(&sites, &g, &QuadratureConfig::default(), true).unwrap();
        let b = assemble_j(&sites, &g, &QuadratureConfig { nodes: 48, check_nodes: 48, rtol: 1e-4 }, true).unwrap();
        let floor = 1e-3 * b.j.amax();
        for (x, y) in a.j.iter().zip(b.j.iter()) {
            assert!((x - y).abs() < 1e-4 * y.abs().max(floor));
        }
    }

    #[test]
    fn point_source_is_small_width_limit() {
        let g = geom();
        let pts = [[-40.0, 20.0], [30.0, 55.0], [70.0, -60.0]];
        let p = point_source_j(&pts.iter().map(|&q| SpinSite::new(q)).collect::<Vec<_>>(), &g).unwrap();
        let diffs: Vec<[f64; 3]> = [1.0, 0.5]
            .iter()
            .map(|&sigma| {
                let sites: Vec<SpinSite> = pts.iter().map(|&q| site(q[0], q[1], sigma, sigma)).collect();
                let m = assemble_j(&sites, &g, &QuadratureConfig::default(), false).unwrap();
                [(0, 1), (0, 2), (1, 2)].map(|(a, b)| (7.0 * m.j[(a, b)] - p.j[(a, b)]).abs())
            })
            .collect();
        // Halving σ quarters the deviation.
        for k in 0..3 {
            let ratio = diffs[1][k] / diffs[0][k];
            assert!((ratio - 0.25).abs() < 0.02, "pair {k}: ratio {ratio}");
        }
    }

    #[test]
    fn non_seven_geometry_rejected_for_point_sources() {
        let g = CavityGeometry::new(2, 5, crate::optics::Q0Parity::Odd, 0, 34.8, 1.0, 0.0).unwrap();
        assert!(point_source_j(&[SpinSite::new([0.0, 0.0])], &g).is_err());
    }
}
