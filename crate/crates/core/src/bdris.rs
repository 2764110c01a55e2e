//! Group-connected beyond-diagonal active RIS matrices: construction,
//! feasibility projection (singular values clipped at the amplification
//! bound) and emitted-power accounting, plus the diagonal active/passive
//! variants used for comparison.

use num_complex::Complex64;

use crate::config::RisMode;
use crate::error::CoreError;
use crate::linalg::{CMat, norm_sq, C64};
use crate::rsma::RsmaAction;

/// A symmetric 2x2 block `[[phi1, b], [b, phi2]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2 {
    pub phi1: C64,
    pub phi2: C64,
    pub b: C64,
}

impl Block2 {
    pub fn new(phi1: C64, phi2: C64, b: C64) -> Self {
        Block2 { phi1, phi2, b }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Block2 { phi1: z, phi2: z, b: z }
    }

    /// Singular values (larger first) by one one-sided Jacobi sweep: a
    /// unitary column rotation makes the two columns orthogonal and the
    /// singular values are their norms. Unlike the A^H A eigenvalue route,
    /// this stays accurate to machine precision at (near-)degenerate
    /// spectra, which the feasibility projection relies on.
    pub fn singular_values(&self) -> [f64; 2] {
        let a1 = [self.phi1, self.b];
        let a2 = [self.b, self.phi2];
        let g11 = a1[0].norm_sqr() + a1[1].norm_sqr();
        let g22 = a2[0].norm_sqr() + a2[1].norm_sqr();
        let g12 = a1[0].conj() * a2[0] + a1[1].conj() * a2[1];
        let mg = g12.norm();
        let (n1, n2) = if mg <= 0.0 {
            (g11.sqrt(), g22.sqrt())
        } else {
            // Phase-align the second column, then the real Jacobi rotation.
            let phase = g12 / mg;
            let tau = (g22 - g11) / (2.0 * mg);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let p = phase.conj();
            let b1 = [c * a1[0] - s * p * a2[0], c * a1[1] - s * p * a2[1]];
            let b2 = [s * a1[0] + c * p * a2[0], s * a1[1] + c * p * a2[1]];
            (
                (b1[0].norm_sqr() + b1[1].norm_sqr()).sqrt(),
                (b2[0].norm_sqr() + b2[1].norm_sqr()).sqrt(),
            )
        };
        if n1 >= n2 {
            [n1, n2]
        } else {
            [n2, n1]
        }
    }

    fn as_mat(&self) -> [[C64; 2]; 2] {
        [[self.phi1, self.b], [self.b, self.phi2]]
    }
}

/// Reflection matrix of the surface in one of the three hardware modes.
#[derive(Debug, Clone, PartialEq)]
pub enum BdRisMatrix {
    /// Group-connected active surface: M/2 symmetric 2x2 blocks, all
    /// singular values <= a_max.
    BdActive { blocks: Vec<Block2>, a_max: f64 },
    /// Diagonal active surface: per-element coefficients, |phi| <= a_max.
    DiagActive { coeffs: Vec<C64>, a_max: f64 },
    /// Diagonal passive surface: per-element coefficients, |phi| <= 1.
    DiagPassive { coeffs: Vec<C64> },
}

impl BdRisMatrix {
    pub fn mode(&self) -> RisMode {
        match self {
            BdRisMatrix::BdActive { .. } => RisMode::BdActive,
            BdRisMatrix::DiagActive { .. } => RisMode::DiagActive,
            BdRisMatrix::DiagPassive { .. } => RisMode::DiagPassive,
        }
    }

    /// Number of RIS elements M.
    pub fn elements(&self) -> usize {
        match self {
            BdRisMatrix::BdActive { blocks, .. } => 2 * blocks.len(),
            BdRisMatrix::DiagActive { coeffs, .. } => coeffs.len(),
            BdRisMatrix::DiagPassive { coeffs } => coeffs.len(),
        }
    }

    /// All-zero surface (no reflection).
    pub fn zero(mode: RisMode, m: usize, a_max: f64) -> Result<Self, CoreError> {
        if m == 0 || m % 2 != 0 {
            return Err(CoreError::structure(format!("element count must be even, got {m}")));
        }
        let z = C64::new(0.0, 0.0);
        Ok(match mode {
            RisMode::BdActive => {
                BdRisMatrix::BdActive { blocks: vec![Block2::zero(); m / 2], a_max }
            }
            RisMode::DiagActive => BdRisMatrix::DiagActive { coeffs: vec![z; m], a_max },
            RisMode::DiagPassive => BdRisMatrix::DiagPassive { coeffs: vec![z; m] },
        })
    }

    /// Applies the reflection matrix to a length-M vector without
    /// assembling the full matrix.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>, CoreError> {
        if x.len() != self.elements() {
            return Err(CoreError::structure(format!(
                "apply: vector length {} does not match {} elements",
                x.len(),
                self.elements()
            )));
        }
        Ok(match self {
            BdRisMatrix::BdActive { blocks, .. } => {
                let mut y = Vec::with_capacity(x.len());
                for (g, blk) in blocks.iter().enumerate() {
                    let (a, b) = (x[2 * g], x[2 * g + 1]);
                    y.push(blk.phi1 * a + blk.b * b);
                    y.push(blk.b * a + blk.phi2 * b);
                }
                y
            }
            BdRisMatrix::DiagActive { coeffs, .. } | BdRisMatrix::DiagPassive { coeffs } => {
                coeffs.iter().zip(x.iter()).map(|(c, v)| c * v).collect()
            }
        })
    }

    /// Full M x M block-diagonal matrix.
    pub fn assemble(&self) -> CMat {
        let m = self.elements();
        let mut out = CMat::zeros(m, m);
        match self {
            BdRisMatrix::BdActive { blocks, .. } => {
                for (g, blk) in blocks.iter().enumerate() {
                    let mat = blk.as_mat();
                    for r in 0..2 {
                        for c in 0..2 {
                            out.set(2 * g + r, 2 * g + c, mat[r][c]);
                        }
                    }
                }
            }
            BdRisMatrix::DiagActive { coeffs, .. } | BdRisMatrix::DiagPassive { coeffs } => {
                for (i, c) in coeffs.iter().enumerate() {
                    out.set(i, i, *c);
                }
            }
        }
        out
    }

    /// Largest singular value across blocks/elements.
    pub fn spectral_norm(&self) -> f64 {
        match self {
            BdRisMatrix::BdActive { blocks, .. } => blocks
                .iter()
                .map(|b| b.singular_values()[0])
                .fold(0.0, f64::max),
            BdRisMatrix::DiagActive { coeffs, .. } | BdRisMatrix::DiagPassive { coeffs } => {
                coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Amplitude bound for the mode (1 for passive).
    pub fn amp_bound(&self) -> f64 {
        match self {
            BdRisMatrix::BdActive { a_max, .. } | BdRisMatrix::DiagActive { a_max, .. } => *a_max,
            BdRisMatrix::DiagPassive { .. } => 1.0,
        }
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.spectral_norm() <= self.amp_bound() + tol
    }
}

/// Assembles a block-diagonal matrix from symmetric 2x2 blocks. Errors on
/// an empty list (the blocks themselves are symmetric by construction of
/// `Block2`).
pub fn assemble(blocks: &[Block2]) -> Result<CMat, CoreError> {
    if blocks.is_empty() {
        return Err(CoreError::structure("assemble: empty block list"));
    }
    Ok(BdRisMatrix::BdActive { blocks: blocks.to_vec(), a_max: f64::INFINITY }.assemble())
}

/// Eigen-decomposition of the Hermitian 2x2 matrix `[[a, b], [conj(b), d]]`
/// (a, d real): returns `(lambda, eigvec)` pairs, larger eigenvalue first.
fn eig_hermitian_2x2(a: f64, b: Complex64, d: f64) -> [(f64, [C64; 2]); 2] {
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = (half_diff * half_diff + b.norm_sqr()).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;

    let unit = |v: [C64; 2]| {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    };

    if b.norm() < 1e-300 {
        // Already diagonal.
        let e1 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let e2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        return if a >= d { [(l1, e1), (l2, e2)] } else { [(l1, e2), (l2, e1)] };
    }

    // For eigenvalue l, (a - l) v0 + b v1 = 0 has solution [b, l - a]
    // (or [l - d, conj(b)]); pick the better-conditioned one.
    let mk = |l: f64| {
        let v_a = [b, C64::new(l - a, 0.0)];
        let v_b = [C64::new(l - d, 0.0), b.conj()];
        let na = v_a[0].norm_sqr() + v_a[1].norm_sqr();
        let nb = v_b[0].norm_sqr() + v_b[1].norm_sqr();
        unit(if na >= nb { v_a } else { v_b })
    };
    [(l1, mk(l1)), (l2, mk(l2))]
}

/// Projects a symmetric 2x2 block onto the feasible set `{sigma_max <= a_max}`
/// by clipping its Takagi singular values (`A = U D U^T`, `D` clipped,
/// reconstructed). Idempotent; feasible inputs pass through unchanged.
///
/// Three cases keep the reconstruction numerically stable:
/// - `s1 <= a_max`: identity.
/// - both singular values exceed the bound (or are numerically tied): the
///   clipped matrix is `a_max` times the symmetric unitary polar factor
///   `U U^T = A (A^H A)^{-1/2}`, computed without eigenvectors.
/// - only `s1` exceeds: subtract the excess along the dominant Takagi
///   direction, `A - (s1 - a_max) u1 u1^T`. The eigenvector
///   ill-conditioning near ties is cancelled by the small coefficient
///   (`s1 - a_max < s1 - s2` here), so the error stays at machine scale.
pub fn project_block(raw: &Block2, a_max: f64) -> Result<Block2, CoreError> {
    if !(a_max.is_finite() && a_max > 0.0) {
        return Err(CoreError::domain(format!("project_block: a_max must be > 0, got {a_max}")));
    }
    let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
    if !(finite(raw.phi1) && finite(raw.phi2) && finite(raw.b)) {
        return Err(CoreError::structure("project_block: non-finite block"));
    }

    let [s1, s2] = raw.singular_values();
    if s1 <= a_max || s1 <= 0.0 {
        return Ok(*raw);
    }

    let m = raw.as_mat();
    // H = A^H A (Hermitian PSD; for symmetric A this also equals conj(A) A).
    let h00 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let h11 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let h01 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];

    // Gaps below the threshold are treated as ties, where clipping is a
    // rescale of the (exactly unitary) polar factor and needs no
    // eigenvectors; in the single-clip branch the eigenvector error is
    // cancelled by the excess coefficient, which the tie bound caps.
    if s2 >= a_max || (s1 - s2) <= 1e-12 * s1 {
        // Both clip to a_max: A' = a_max * A (A^H A)^{-1/2} with
        // H^{-1/2} = (s1 + s2) (H + s1 s2 I)^{-1}.
        let prod = s1 * s2;
        let sum = s1 + s2;
        let p = h00 + prod;
        let r = h11 + prod;
        let det = p * r - h01.norm_sqr();
        let inv = [
            [C64::new(r / det, 0.0), -h01 / det],
            [-h01.conj() / det, C64::new(p / det, 0.0)],
        ];
        let mut q = [[C64::new(0.0, 0.0); 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                for k in 0..2 {
                    q[row][col] += m[row][k] * inv[k][col];
                }
                q[row][col] *= sum * a_max;
            }
        }
        let b_sym = 0.5 * (q[0][1] + q[1][0]);
        return Ok(Block2::new(q[0][0], q[1][1], b_sym));
    }

    // Only s1 clips. Dominant eigenvector of H (larger eigenvalue first).
    let (lambda1, q1) = eig_hermitian_2x2(h00, h01, h11)[0];
    let _ = lambda1;
    // tau = q^T A q = s1 e^{2 i beta}; the Takagi vector is
    // u1 = e^{i beta} conj(q1).
    let aq = [m[0][0] * q1[0] + m[0][1] * q1[1], m[1][0] * q1[0] + m[1][1] * q1[1]];
    let tau = q1[0] * aq[0] + q1[1] * aq[1];
    let half_phase = C64::from_polar(1.0, 0.5 * tau.arg());
    let u1 = [half_phase * q1[0].conj(), half_phase * q1[1].conj()];
    let excess = s1 - a_max;
    let out = [
        [m[0][0] - excess * u1[0] * u1[0], m[0][1] - excess * u1[0] * u1[1]],
        [m[1][0] - excess * u1[1] * u1[0], m[1][1] - excess * u1[1] * u1[1]],
    ];
    let b_sym = 0.5 * (out[0][1] + out[1][0]);
    Ok(Block2::new(out[0][0], out[1][1], b_sym))
}

/// Clips a diagonal coefficient to the amplitude bound, preserving phase.
pub fn project_diag(raw: C64, bound: f64) -> C64 {
    let n = raw.norm();
    if n <= bound || n == 0.0 {
        raw
    } else {
        raw * (bound / n)
    }
}

/// Expected power emitted by the surface given unit-power symbols:
/// `P_out = p_s (a_c ||Phi H_u w_c||^2 + sum_i a_i ||Phi H_u w_i||^2)`.
pub fn ris_output_power(
    phi: &BdRisMatrix,
    h_u: &CMat,
    action: &RsmaAction,
    p_s: f64,
) -> Result<f64, CoreError> {
    if h_u.rows != phi.elements() {
        return Err(CoreError::structure(format!(
            "ris_output_power: H_u has {} rows but the surface has {} elements",
            h_u.rows,
            phi.elements()
        )));
    }
    if !(p_s.is_finite() && p_s >= 0.0) {
        return Err(CoreError::domain(format!("ris_output_power: p_s must be >= 0, got {p_s}")));
    }
    let beam_power = |w: &[C64]| -> Result<f64, CoreError> {
        let through = h_u.matvec(w)?;
        Ok(norm_sq(&phi.apply(&through)?))
    };
    let mut total = action.a_c * beam_power(&action.w_c)?;
    for (a_i, w_i) in action.a.iter().zip(action.w.iter()) {
        total += a_i * beam_power(w_i)?;
    }
    Ok(p_s * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::substream;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_block<R: Rng>(rng: &mut R, scale: f64) -> Block2 {
        let mut z = || c(rng.random_range(-1.0..1.0) * scale, rng.random_range(-1.0..1.0) * scale);
        Block2::new(z(), z(), z())
    }

    /// Independent oracle: singular values from the eigenvalues of A^H A,
    /// assembled explicitly (different route from Block2::singular_values).
    fn sv_oracle(b: &Block2) -> [f64; 2] {
        let m = [[b.phi1, b.b], [b.b, b.phi2]];
        let h00 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let h11 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let h01 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        let half_tr = 0.5 * (h00 + h11);
        let disc = (0.25 * (h00 - h11) * (h00 - h11) + h01.norm_sqr()).sqrt();
        [(half_tr + disc).max(0.0).sqrt(), (half_tr - disc).max(0.0).sqrt()]
    }

    #[test]
    fn identity_block_assembles_and_is_feasible() {
        let blk = Block2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let phi = assemble(&[blk]).unwrap();
        assert_eq!(phi.rows, 2);
        assert_eq!(phi.at(0, 0), c(1.0, 0.0));
        assert_eq!(phi.at(0, 1), c(0.0, 0.0));
        let m = BdRisMatrix::BdActive { blocks: vec![blk], a_max: 1.0 };
        assert!(m.is_feasible(1e-12));
    }

    #[test]
    fn two_blocks_occupy_disjoint_diagonals() {
        let a = Block2::new(c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.5));
        let b = Block2::new(c(-1.0, 1.0), c(0.0, 3.0), c(0.25, 0.0));
        let phi = assemble(&[a, b]).unwrap();
        assert_eq!(phi.at(0, 0), a.phi1);
        assert_eq!(phi.at(0, 1), a.b);
        assert_eq!(phi.at(1, 0), a.b);
        assert_eq!(phi.at(1, 1), a.phi2);
        assert_eq!(phi.at(2, 2), b.phi1);
        assert_eq!(phi.at(3, 2), b.b);
        for r in 0..4 {
            for col in 0..4 {
                if (r < 2) != (col < 2) {
                    assert_eq!(phi.at(r, col), c(0.0, 0.0), "({r},{col}) must be zero");
                }
            }
        }
    }

    #[test]
    fn assembled_matrix_is_globally_symmetric() {
        let mut rng = substream(41, &[]);
        for _ in 0..100 {
            let blocks: Vec<Block2> = (0..4).map(|_| random_block(&mut rng, 2.0)).collect();
            let phi = assemble(&blocks).unwrap();
            let phit = phi.transpose();
            for (a, b) in phi.data.iter().zip(phit.data.iter()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn assemble_rejects_empty() {
        assert!(assemble(&[]).is_err());
    }

    #[test]
    fn projection_clips_only_excessive_singular_value() {
        // Singular values {2, 0.5} -> {1, 0.5} at a_max = 1.
        let raw = Block2::new(c(2.0, 0.0), c(0.5, 0.0), c(0.0, 0.0));
        assert_eq!(raw.singular_values(), [2.0, 0.5]);
        let out = project_block(&raw, 1.0).unwrap();
        let sv = sv_oracle(&out);
        assert!((sv[0] - 1.0).abs() < 1e-12, "{sv:?}");
        assert!((sv[1] - 0.5).abs() < 1e-12, "{sv:?}");
        // Direction of the untouched singular space is preserved.
        assert!((out.phi2 - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn projection_is_identity_on_feasible_blocks() {
        let mut rng = substream(42, &[]);
        for _ in 0..200 {
            let raw = random_block(&mut rng, 0.4); // spectral norm < 1.3 < 4
            let out = project_block(&raw, 4.0).unwrap();
            assert!((out.phi1 - raw.phi1).norm() < 1e-12);
            assert!((out.phi2 - raw.phi2).norm() < 1e-12);
            assert!((out.b - raw.b).norm() < 1e-12);
        }
    }

    #[test]
    fn isotropic_block_clips_to_identity() {
        let raw = Block2::new(c(3.0, 0.0), c(3.0, 0.0), c(0.0, 0.0));
        let out = project_block(&raw, 1.0).unwrap();
        assert!((out.phi1 - c(1.0, 0.0)).norm() < 1e-12);
        assert!((out.phi2 - c(1.0, 0.0)).norm() < 1e-12);
        assert!(out.b.norm() < 1e-12);
    }

    #[test]
    fn projection_idempotent_and_bounded_random_sweep() {
        let mut rng = substream(43, &[]);
        for trial in 0..1000 {
            let raw = random_block(&mut rng, 3.0);
            let a_max = rng.random_range(0.2..2.5);
            let once = project_block(&raw, a_max).unwrap();
            let twice = project_block(&once, a_max).unwrap();
            let sv = sv_oracle(&once);
            assert!(sv[0] <= a_max + 1e-10, "trial {trial}: sigma {sv:?} > {a_max}");
            assert!(
                (once.phi1 - twice.phi1).norm() < 1e-10
                    && (once.phi2 - twice.phi2).norm() < 1e-10
                    && (once.b - twice.b).norm() < 1e-10,
                "trial {trial}: projection not idempotent"
            );
            // Clipped values match min(s, a_max) of the raw block.
            let raw_sv = sv_oracle(&raw);
            assert!((sv[0] - raw_sv[0].min(a_max)).abs() < 1e-9, "trial {trial}");
            assert!((sv[1] - raw_sv[1].min(a_max)).abs() < 1e-9, "trial {trial}");
        }
    }

    #[test]
    fn assemble_preserves_block_spectra() {
        let mut rng = substream(44, &[]);
        let blocks: Vec<Block2> = (0..3).map(|_| random_block(&mut rng, 1.5)).collect();
        let surface = BdRisMatrix::BdActive { blocks: blocks.clone(), a_max: 10.0 };
        let full = surface.assemble();
        // Frobenius norm of the assembled matrix equals the root sum of
        // squared block singular values (union of spectra).
        let fro: f64 = full.data.iter().map(|z| z.norm_sqr()).sum();
        let sv_sum: f64 = blocks
            .iter()
            .map(|b| {
                let sv = b.singular_values();
                sv[0] * sv[0] + sv[1] * sv[1]
            })
            .sum();
        assert!((fro - sv_sum).abs() < 1e-10);
        assert!((surface.spectral_norm()
            - blocks.iter().map(|b| b.singular_values()[0]).fold(0.0, f64::max))
        .abs()
            < 1e-12);
    }

    #[test]
    fn passive_mode_never_amplifies() {
        let mut rng = substream(45, &[]);
        let coeffs: Vec<C64> = (0..8)
            .map(|_| {
                project_diag(
                    c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                    1.0,
                )
            })
            .collect();
        let phi = BdRisMatrix::DiagPassive { coeffs };
        for _ in 0..50 {
            let x: Vec<C64> =
                (0..8).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let y = phi.apply(&x).unwrap();
            assert!(norm_sq(&y) <= norm_sq(&x) + 1e-12);
        }
    }

    #[test]
    fn output_power_zero_surface() {
        let phi = BdRisMatrix::zero(RisMode::BdActive, 4, 1.0).unwrap();
        let h_u = CMat::zeros(4, 2);
        let action = RsmaAction::test_stub(2, 4, 1);
        assert_eq!(ris_output_power(&phi, &h_u, &action, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn output_power_scalar_case() {
        // N = M = 1 is not representable (M must be even); the scalar
        // expansion uses a 2-element diagonal surface with one active path:
        // Phi = diag(2, 0), H_u = [1; 0], single stream a1 = 1, w1 = 1,
        // p_s = 3 -> P_out = 3 * |2 * 1|^2 = 12.
        let phi = BdRisMatrix::DiagActive { coeffs: vec![c(2.0, 0.0), c(0.0, 0.0)], a_max: 4.0 };
        let h_u = CMat::from_rows(vec![vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]]).unwrap();
        let mut action = RsmaAction::test_stub(1, 2, 1);
        action.a_c = 0.0;
        action.a = vec![1.0];
        action.w = vec![vec![c(1.0, 0.0)]];
        let p = ris_output_power(&phi, &h_u, &action, 3.0).unwrap();
        assert!((p - 12.0).abs() < 1e-12);
    }

    #[test]
    fn output_power_invariant_under_unitary_surface() {
        // Unitary blocks (all singular values 1) preserve ||H_u w||^2.
        let mut rng = substream(46, &[]);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        // Rotation-like symmetric unitary: [[cos, i sin], [i sin, cos]].
        let blk = Block2::new(
            c(theta.cos(), 0.0),
            c(theta.cos(), 0.0),
            c(0.0, theta.sin()),
        );
        let sv = blk.singular_values();
        assert!((sv[0] - 1.0).abs() < 1e-12 && (sv[1] - 1.0).abs() < 1e-12);
        let phi = BdRisMatrix::BdActive { blocks: vec![blk, blk], a_max: 1.0 };

        let h_u = CMat::from_rows(vec![
            vec![c(0.3, 0.1), c(-0.2, 0.4)],
            vec![c(1.0, -0.5), c(0.0, 0.2)],
            vec![c(-0.7, 0.0), c(0.5, 0.5)],
            vec![c(0.1, 0.9), c(0.3, -0.3)],
        ])
        .unwrap();
        let mut action = RsmaAction::test_stub(2, 4, 2);
        action.a_c = 0.4;
        action.a = vec![0.3, 0.3];
        let p = ris_output_power(&phi, &h_u, &action, 2.0).unwrap();

        let direct = |w: &[C64]| norm_sq(&h_u.matvec(w).unwrap());
        let want = 2.0
            * (0.4 * direct(&action.w_c)
                + 0.3 * direct(&action.w[0])
                + 0.3 * direct(&action.w[1]));
        assert!((p - want).abs() / want < 1e-12);
    }

    #[test]
    fn output_power_dimension_mismatch() {
        let phi = BdRisMatrix::zero(RisMode::BdActive, 4, 1.0).unwrap();
        let h_u = CMat::zeros(6, 2);
        let action = RsmaAction::test_stub(2, 6, 1);
        assert!(ris_output_power(&phi, &h_u, &action, 1.0).is_err());
    }
}
