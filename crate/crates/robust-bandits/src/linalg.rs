//! Dense positive-definite linear algebra for incremental weighted ridge
//! regression and confidence-ellipsoid geometry.
//!
//! [`WeightedRidgeState`] maintains the weighted Gram matrix `Σ = λI + Σᵢ
//! aᵢaᵢᵀ/σ̄ᵢ²`, its inverse (rank-1 updates, periodically re-factorized), the
//! moment vector `b = Σᵢ rᵢaᵢ/σ̄ᵢ²` and the estimate `μ = Σ⁻¹b`.
//! [`Ellipsoid`] is the confidence-set primitive `{μ : ‖μ − c‖_M ≤ r}` with
//! exact linear maximization, and [`ConfidenceSet`] is either a single
//! ellipsoid or an intersection of two with a min-of-bounds surrogate index.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::{Error, Result};

/// Rank-1 inverse updates drift; re-derive the inverse from a fresh
/// factorization this often (and at trial end via [`WeightedRidgeState::refactorize`]).
const REFACTOR_INTERVAL: u64 = 1000;

/// Relative tolerance for the Lagrange-multiplier bisection in
/// [`Ellipsoid::intersects`].
const BISECT_REL_TOL: f64 = 1e-9;

fn check_dim(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidArgument(format!(
            "{what}: dimension mismatch (expected {expected}, got {got})"
        )));
    }
    Ok(())
}

/// Incremental weighted ridge regression state.
#[derive(Debug, Clone)]
pub struct WeightedRidgeState {
    dim: usize,
    lambda: f64,
    sigma_mat: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    moment: DVector<f64>,
    estimate: DVector<f64>,
    num_updates: u64,
    since_refactor: u64,
}

impl WeightedRidgeState {
    /// Fresh state: `Σ = λI`, `Σ⁻¹ = I/λ`, `b = 0`, `μ = 0`.
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("ridge dimension must be >= 1".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ridge regularizer must be positive and finite, got {lambda}"
            )));
        }
        Ok(WeightedRidgeState {
            dim,
            lambda,
            sigma_mat: DMatrix::identity(dim, dim) * lambda,
            sigma_inv: DMatrix::identity(dim, dim) / lambda,
            moment: DVector::zeros(dim),
            estimate: DVector::zeros(dim),
            num_updates: 0,
            since_refactor: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_updates(&self) -> u64 {
        self.num_updates
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma_mat
    }

    pub fn sigma_inv(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }

    pub fn moment(&self) -> &DVector<f64> {
        &self.moment
    }

    pub fn estimate(&self) -> &DVector<f64> {
        &self.estimate
    }

    /// Absorb one observation: `Σ += aaᵀ/σ̄²`, `b += r·a/σ̄²`, `μ = Σ⁻¹b`.
    ///
    /// The inverse is maintained by the Sherman–Morrison rank-1 formula and
    /// re-derived from a Cholesky factorization every [`REFACTOR_INTERVAL`]
    /// updates to cap drift.
    pub fn update(&mut self, action: &DVector<f64>, reward: f64, sigma_bar: f64) -> Result<()> {
        check_dim(self.dim, action.len(), "ridge update action")?;
        if !(sigma_bar > 0.0) || !sigma_bar.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma_bar must be positive and finite, got {sigma_bar}"
            )));
        }
        let w = 1.0 / (sigma_bar * sigma_bar);
        self.sigma_mat.ger(w, action, action, 1.0);
        // (A + w·aaᵀ)⁻¹ = A⁻¹ − w·(A⁻¹a)(A⁻¹a)ᵀ / (1 + w·aᵀA⁻¹a)
        let u = &self.sigma_inv * action;
        let denom = 1.0 + w * action.dot(&u);
        self.sigma_inv.ger(-w / denom, &u, &u, 1.0);
        self.moment.axpy(w * reward, action, 1.0);
        self.num_updates += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_INTERVAL {
            self.refactorize();
        } else {
            self.estimate = &self.sigma_inv * &self.moment;
        }
        Ok(())
    }

    /// Re-derive `Σ⁻¹` and `μ` from a fresh Cholesky factorization of `Σ`.
    pub fn refactorize(&mut self) {
        let chol = Cholesky::new(self.sigma_mat.clone())
            .expect("weighted Gram matrix must stay positive definite");
        self.sigma_inv = chol.inverse();
        self.estimate = chol.solve(&self.moment);
        self.since_refactor = 0;
        debug_assert!(
            self.inverse_defect() <= 1e-8,
            "inverse defect {} exceeds 1e-8 after refactorization",
            self.inverse_defect()
        );
    }

    /// `‖Σ·Σ⁻¹ − I‖_∞`, the maintained-inverse defect.
    pub fn inverse_defect(&self) -> f64 {
        let prod = &self.sigma_mat * &self.sigma_inv;
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `‖v‖_{Σ⁻¹} = √(vᵀ Σ⁻¹ v)`; zero iff `v = 0`.
    pub fn norm_inv(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim, v.len(), "norm_inv vector")?;
        Ok(v.dot(&(&self.sigma_inv * v)).max(0.0).sqrt())
    }

    /// `‖v‖_Σ = √(vᵀ Σ v)`.
    pub fn norm_sigma(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim, v.len(), "norm_sigma vector")?;
        Ok(v.dot(&(&self.sigma_mat * v)).max(0.0).sqrt())
    }
}

/// A confidence ellipsoid `{μ : ‖μ − center‖_shape ≤ radius}`.
///
/// `radius = 0` is the singleton `{center}`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    shape_inv: DMatrix<f64>,
    radius: f64,
}

impl Ellipsoid {
    pub fn new(
        center: DVector<f64>,
        shape: DMatrix<f64>,
        shape_inv: DMatrix<f64>,
        radius: f64,
    ) -> Result<Self> {
        let d = center.len();
        check_dim(d, shape.nrows(), "ellipsoid shape rows")?;
        check_dim(d, shape.ncols(), "ellipsoid shape cols")?;
        check_dim(d, shape_inv.nrows(), "ellipsoid shape_inv rows")?;
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ellipsoid radius must be nonnegative, got {radius}"
            )));
        }
        Ok(Ellipsoid {
            center,
            shape,
            shape_inv,
            radius,
        })
    }

    /// Confidence set of a ridge estimator: centered at `μ` with shape `Σ`.
    pub fn from_ridge(state: &WeightedRidgeState, radius: f64) -> Result<Self> {
        Ellipsoid::new(
            state.estimate().clone(),
            state.sigma().clone(),
            state.sigma_inv().clone(),
            radius,
        )
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `max_{μ ∈ E} ⟨μ, a⟩ = ⟨center, a⟩ + radius·‖a‖_{shape⁻¹}`, exactly.
    pub fn ucb(&self, a: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), a.len(), "ellipsoid ucb action")?;
        let bonus = a.dot(&(&self.shape_inv * a)).max(0.0).sqrt();
        Ok(self.center.dot(a) + self.radius * bonus)
    }

    /// Membership test `‖μ − center‖_shape ≤ radius + slack`.
    pub fn contains(&self, mu: &DVector<f64>, slack: f64) -> Result<bool> {
        check_dim(self.dim(), mu.len(), "ellipsoid membership point")?;
        let diff = mu - &self.center;
        let dist = diff.dot(&(&self.shape * &diff)).max(0.0).sqrt();
        Ok(dist <= self.radius + slack)
    }

    /// Distance `‖μ(ν) − c₁‖_{M₁}` of the penalized minimizer
    /// `μ(ν) = (M₂ + νM₁)⁻¹(M₂c₂ + νM₁c₁)`; decreasing in `ν`.
    fn constrained_center(&self, other: &Ellipsoid, nu: f64) -> DVector<f64> {
        let lhs = &other.shape + &self.shape * nu;
        let rhs = &other.shape * &other.center + &self.shape * &self.center * nu;
        Cholesky::new(lhs)
            .expect("sum of positive-definite shapes must be positive definite")
            .solve(&rhs)
    }

    fn dist_in(&self, mu: &DVector<f64>) -> f64 {
        let diff = mu - &self.center;
        diff.dot(&(&self.shape * &diff)).max(0.0).sqrt()
    }

    /// Emptiness test for the intersection with `other`.
    ///
    /// Minimizes `‖μ − c₂‖_{M₂}` over this ellipsoid — a trust-region-style
    /// subproblem with one quadratic constraint, solved by bisection on the
    /// Lagrange multiplier — and reports whether the minimum is `≤ r₂ + tol`.
    /// Boundary-tangent pairs count as intersecting.
    pub fn intersects(&self, other: &Ellipsoid, tol: f64) -> Result<bool> {
        check_dim(self.dim(), other.dim(), "ellipsoid intersection")?;
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "intersection tolerance must be positive, got {tol}"
            )));
        }
        // Singleton: distance from the point.
        if self.radius == 0.0 {
            return Ok(other.dist_in(&self.center) <= other.radius + tol);
        }
        // Unconstrained minimizer c₂ already inside this ellipsoid.
        if self.dist_in(&other.center) <= self.radius {
            return Ok(true);
        }
        // Bracket the multiplier: g(0) > r₁, and g(ν) → 0 as ν → ∞.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut doublings = 0;
        while self.dist_in(&self.constrained_center(other, hi)) > self.radius {
            hi *= 2.0;
            doublings += 1;
            if doublings > 200 {
                // Numerically degenerate shapes; the feasible point is c₁ itself.
                return Ok(other.dist_in(&self.center) <= other.radius + tol);
            }
        }
        while hi - lo > BISECT_REL_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.dist_in(&self.constrained_center(other, mid)) > self.radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // hi is on the feasible side of the boundary.
        let closest = self.constrained_center(other, hi);
        Ok(other.dist_in(&closest) <= other.radius + tol)
    }
}

/// Optimistic index over the intersection of two ellipsoids:
/// `min(ucb(e1, a), ucb(e2, a))`.
///
/// This upper-bounds the exact maximum of `⟨μ, a⟩` over the intersection and
/// stays optimistic whenever the target parameter lies in both ellipsoids.
pub fn intersection_ucb(e1: &Ellipsoid, e2: &Ellipsoid, a: &DVector<f64>) -> Result<f64> {
    Ok(e1.ucb(a)?.min(e2.ucb(a)?))
}

/// A candidate confidence set: one ellipsoid, or an intersection of two.
#[derive(Debug, Clone)]
pub enum ConfidenceSet {
    Single(Ellipsoid),
    Intersection(Ellipsoid, Ellipsoid),
}

impl ConfidenceSet {
    pub fn ucb(&self, a: &DVector<f64>) -> Result<f64> {
        match self {
            ConfidenceSet::Single(e) => e.ucb(a),
            ConfidenceSet::Intersection(e1, e2) => intersection_ucb(e1, e2, a),
        }
    }

    pub fn contains(&self, mu: &DVector<f64>, slack: f64) -> Result<bool> {
        match self {
            ConfidenceSet::Single(e) => e.contains(mu, slack),
            ConfidenceSet::Intersection(e1, e2) => {
                Ok(e1.contains(mu, slack)? && e2.contains(mu, slack)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn dvec(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn unit_ball(center: &[f64]) -> Ellipsoid {
        let d = center.len();
        Ellipsoid::new(
            dvec(center),
            DMatrix::identity(d, d),
            DMatrix::identity(d, d),
            1.0,
        )
        .unwrap()
    }

    /// Direct dense solve of the weighted normal equations; independent of
    /// the incremental path.
    fn direct_solve(
        lambda: f64,
        data: &[(DVector<f64>, f64, f64)],
        d: usize,
    ) -> DVector<f64> {
        let mut gram = DMatrix::identity(d, d) * lambda;
        let mut rhs = DVector::zeros(d);
        for (a, r, sbar) in data {
            let w = 1.0 / (sbar * sbar);
            gram.ger(w, a, a, 1.0);
            rhs.axpy(w * r, a, 1.0);
        }
        Cholesky::new(gram).unwrap().solve(&rhs)
    }

    #[test]
    fn init_identity() {
        let st = WeightedRidgeState::new(2, 1.0).unwrap();
        assert_eq!(st.sigma(), &DMatrix::identity(2, 2));
        assert_eq!(st.sigma_inv(), &DMatrix::identity(2, 2));
        assert_eq!(st.estimate(), &DVector::zeros(2));
        assert_eq!(st.num_updates(), 0);
    }

    #[test]
    fn init_scalar() {
        let st = WeightedRidgeState::new(1, 4.0).unwrap();
        assert_eq!(st.sigma()[(0, 0)], 4.0);
        assert_eq!(st.sigma_inv()[(0, 0)], 0.25);
        assert_eq!(st.estimate()[0], 0.0);
    }

    #[test]
    fn init_spectrum_is_flat() {
        let st = WeightedRidgeState::new(20, 1.0).unwrap();
        let eig = st.sigma().clone().symmetric_eigen();
        for ev in eig.eigenvalues.iter() {
            assert_relative_eq!(*ev, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn init_rejects_bad_args() {
        assert!(WeightedRidgeState::new(0, 1.0).is_err());
        assert!(WeightedRidgeState::new(2, 0.0).is_err());
        assert!(WeightedRidgeState::new(2, -1.0).is_err());
    }

    #[test]
    fn single_update_closed_form() {
        let mut st = WeightedRidgeState::new(2, 1.0).unwrap();
        st.update(&dvec(&[1.0, 0.0]), 1.0, 1.0).unwrap();
        assert_relative_eq!(st.sigma()[(0, 0)], 2.0);
        assert_relative_eq!(st.sigma()[(1, 1)], 1.0);
        assert_relative_eq!(st.sigma_inv()[(0, 0)], 0.5);
        assert_relative_eq!(st.sigma_inv()[(1, 1)], 1.0);
        assert_relative_eq!(st.estimate()[0], 0.5);
        assert_relative_eq!(st.estimate()[1], 0.0);
    }

    #[test]
    fn single_update_with_weight() {
        let mut st = WeightedRidgeState::new(2, 1.0).unwrap();
        st.update(&dvec(&[1.0, 0.0]), 1.0, 2.0).unwrap();
        assert_relative_eq!(st.sigma()[(0, 0)], 1.25);
        assert_relative_eq!(st.sigma()[(1, 1)], 1.0);
        assert_relative_eq!(st.estimate()[0], 0.2, max_relative = 1e-12);
    }

    #[test]
    fn update_rejects_bad_args() {
        let mut st = WeightedRidgeState::new(2, 1.0).unwrap();
        assert!(st.update(&dvec(&[1.0, 0.0]), 1.0, 0.0).is_err());
        assert!(st.update(&dvec(&[1.0, 0.0]), 1.0, -1.0).is_err());
        assert!(st.update(&dvec(&[1.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn incremental_matches_direct_solve() {
        let d = 10;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut st = WeightedRidgeState::new(d, 0.7).unwrap();
        let mut data = Vec::new();
        for _ in 0..500 {
            let a = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let r = rng.random_range(-1.0..1.0);
            let sbar = rng.random_range(0.3..2.0);
            st.update(&a, r, sbar).unwrap();
            data.push((a, r, sbar));
        }
        let direct = direct_solve(0.7, &data, d);
        let rel = (st.estimate() - &direct).norm() / direct.norm();
        assert!(rel <= 1e-8, "relative error {rel}");
    }

    #[test]
    fn long_sequence_defect_stays_bounded() {
        let d = 5;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut st = WeightedRidgeState::new(d, 1.0).unwrap();
        for _ in 0..10_000 {
            let a = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            st.update(&a, rng.random_range(-1.0..1.0), rng.random_range(0.3..2.0))
                .unwrap();
        }
        st.refactorize();
        assert!(st.inverse_defect() <= 1e-8);
    }

    #[test]
    fn norm_inv_examples() {
        let st = WeightedRidgeState::new(2, 1.0).unwrap();
        assert_relative_eq!(st.norm_inv(&dvec(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(st.norm_inv(&dvec(&[0.0, 0.0])).unwrap(), 0.0);

        let mut st = WeightedRidgeState::new(2, 1.0).unwrap();
        // Σ = diag(4, 1): one unit-weight pull of √3·e₀ on top of λ=1.
        let a = dvec(&[3f64.sqrt(), 0.0]);
        st.update(&a, 0.0, 1.0).unwrap();
        assert_relative_eq!(st.norm_inv(&dvec(&[2.0, 0.0])).unwrap(), 1.0, max_relative = 1e-12);
        assert!(st.norm_inv(&dvec(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn norm_inv_monotone_in_updates() {
        let d = 4;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut st = WeightedRidgeState::new(d, 1.0).unwrap();
        let probe = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let mut last = st.norm_inv(&probe).unwrap();
        for _ in 0..200 {
            let a = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            st.update(&a, rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5))
                .unwrap();
            let now = st.norm_inv(&probe).unwrap();
            assert!(now <= last + 1e-9);
            last = now;
        }
    }

    #[test]
    fn ucb_examples() {
        let e = Ellipsoid::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            2.0,
        )
        .unwrap();
        assert_relative_eq!(e.ucb(&dvec(&[3.0, 4.0])).unwrap(), 10.0);

        let singleton = Ellipsoid::new(
            dvec(&[1.0, -2.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            0.0,
        )
        .unwrap();
        let a = dvec(&[0.5, 0.25]);
        assert_relative_eq!(singleton.ucb(&a).unwrap(), singleton.center().dot(&a));
    }

    fn random_ellipsoid(rng: &mut ChaCha12Rng, d: usize) -> Ellipsoid {
        // Random PD shape M = QᵀDQ with eigenvalues in [0.5, 3].
        let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let qr = raw.qr();
        let q = qr.q();
        let eigs = DVector::from_fn(d, |_, _| rng.random_range(0.5..3.0));
        let shape = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
        let shape_inv = &q * DMatrix::from_diagonal(&eigs.map(|e| 1.0 / e)) * q.transpose();
        let center = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let radius = rng.random_range(0.2..1.5);
        Ellipsoid::new(center, shape, shape_inv, radius).unwrap()
    }

    /// Boundary points of a 2-D ellipsoid: μ(θ) = c + r·Q·D^{-1/2}·[cosθ, sinθ].
    fn boundary_grid(e: &Ellipsoid, n: usize) -> Vec<DVector<f64>> {
        let eig = e.shape().clone().symmetric_eigen();
        let q = &eig.eigenvectors;
        let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
        let map = q * scale;
        (0..n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                e.center() + &map * dvec(&[theta.cos(), theta.sin()]) * e.radius()
            })
            .collect()
    }

    #[test]
    fn ucb_matches_boundary_grid() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..20 {
            let e = random_ellipsoid(&mut rng, 2);
            let a = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let grid_max = boundary_grid(&e, 20_000)
                .iter()
                .map(|mu| mu.dot(&a))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(e.ucb(&a).unwrap(), grid_max, epsilon = 1e-3);
        }
    }

    #[test]
    fn intersects_unit_ball_cases() {
        let a = unit_ball(&[0.0, 0.0]);
        let disjoint = unit_ball(&[3.0, 0.0]);
        let nested = unit_ball(&[0.0, 0.0]);
        let tangent = unit_ball(&[2.0, 0.0]);
        assert!(!a.intersects(&disjoint, 1e-9).unwrap());
        assert!(a.intersects(&nested, 1e-9).unwrap());
        assert!(a.intersects(&tangent, 1e-6).unwrap());
    }

    #[test]
    fn intersection_ucb_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let e1 = random_ellipsoid(&mut rng, 2);
        let a = dvec(&[0.3, -1.1]);
        assert_eq!(
            intersection_ucb(&e1, &e1, &a).unwrap(),
            e1.ucb(&a).unwrap()
        );
        let huge = Ellipsoid::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            1e12,
        )
        .unwrap();
        assert_eq!(
            intersection_ucb(&e1, &huge, &a).unwrap(),
            e1.ucb(&a).unwrap()
        );
    }

    #[test]
    fn intersection_ucb_brackets_grid_max() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let mut tested = 0;
        while tested < 10 {
            let e1 = random_ellipsoid(&mut rng, 2);
            let mut e2 = random_ellipsoid(&mut rng, 2);
            // Pull centers together so the intersection is comfortably nonempty.
            e2 = Ellipsoid::new(
                (e1.center() + e2.center()) / 2.0,
                e2.shape().clone(),
                e2.shape().clone().try_inverse().unwrap(),
                e2.radius().max(0.8),
            )
            .unwrap();
            if !e1.intersects(&e2, 1e-9).unwrap() {
                continue;
            }
            let a = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            // Interior grid of e1 filtered by membership in e2.
            let mut best = f64::NEG_INFINITY;
            let n = 400;
            let eig = e1.shape().clone().symmetric_eigen();
            let map = &eig.eigenvectors
                * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
            for i in 0..n {
                for j in 0..n {
                    let x = -1.0 + 2.0 * (i as f64) / (n as f64 - 1.0);
                    let y = -1.0 + 2.0 * (j as f64) / (n as f64 - 1.0);
                    if x * x + y * y > 1.0 {
                        continue;
                    }
                    let mu = e1.center() + &map * dvec(&[x, y]) * e1.radius();
                    if e2.contains(&mu, 0.0).unwrap() {
                        best = best.max(mu.dot(&a));
                    }
                }
            }
            if best == f64::NEG_INFINITY {
                continue; // intersection thinner than the grid
            }
            let surrogate = intersection_ucb(&e1, &e2, &a).unwrap();
            assert!(surrogate >= best - 1e-3, "{surrogate} < grid max {best}");
            let single = e1.ucb(&a).unwrap().min(e2.ucb(&a).unwrap());
            assert!(surrogate <= single + 1e-12);
            tested += 1;
        }
    }

    proptest! {
        #[test]
        fn ucb_bonus_is_even_in_sign(
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let e = random_ellipsoid(&mut rng, 3);
            let a = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let plus = e.ucb(&a).unwrap() - e.center().dot(&a);
            let minus = e.ucb(&(-&a)).unwrap() - e.center().dot(&(-&a));
            prop_assert!((plus - minus).abs() <= 1e-9 * plus.abs().max(1.0));
        }

        #[test]
        fn intersects_is_symmetric(seed in 0u64..300) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let e1 = random_ellipsoid(&mut rng, 2);
            let e2 = random_ellipsoid(&mut rng, 2);
            let ab = e1.intersects(&e2, 1e-7).unwrap();
            let ba = e2.intersects(&e1, 1e-7).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }
}
