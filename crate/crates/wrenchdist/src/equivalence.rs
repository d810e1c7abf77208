//! The dynamically-equivalent virtual system: virtual masses per contact,
//! induced inertia, torque-share assignment and the dimension of the
//! feasible family of distributions.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{ContactSet, WrenchSpace};
use crate::numerics::{null_space_basis, rank, skew, solve_min_norm, Matrix, Tolerance, Vector};

/// Rotational inertia of a virtual body: a symmetric tensor in 3-D, a
/// scalar in the plane. Translational spaces carry no inertia at all and
/// are represented by `Option<Inertia>::None` at the call sites.
#[derive(Debug, Clone, PartialEq)]
pub enum Inertia {
    Spatial(Matrix3<f64>),
    Planar(f64),
}

impl Inertia {
    pub fn zero(space: WrenchSpace) -> Option<Inertia> {
        match space {
            WrenchSpace::Spatial => Some(Inertia::Spatial(Matrix3::zeros())),
            WrenchSpace::Planar => Some(Inertia::Planar(0.0)),
            _ => None,
        }
    }

    pub fn identity(space: WrenchSpace) -> Option<Inertia> {
        match space {
            WrenchSpace::Spatial => Some(Inertia::Spatial(Matrix3::identity())),
            WrenchSpace::Planar => Some(Inertia::Planar(1.0)),
            _ => None,
        }
    }

    pub fn scaled(&self, k: f64) -> Inertia {
        match self {
            Inertia::Spatial(m) => Inertia::Spatial(m * k),
            Inertia::Planar(j) => Inertia::Planar(j * k),
        }
    }

    pub fn add(&self, other: &Inertia) -> Inertia {
        match (self, other) {
            (Inertia::Spatial(a), Inertia::Spatial(b)) => Inertia::Spatial(a + b),
            (Inertia::Planar(a), Inertia::Planar(b)) => Inertia::Planar(a + b),
            _ => panic!("mixed inertia kinds"),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Inertia::Spatial(m) => m.norm(),
            Inertia::Planar(j) => j.abs(),
        }
    }

    /// Frobenius inner product (plain product for scalars).
    fn dot(&self, other: &Inertia) -> f64 {
        match (self, other) {
            (Inertia::Spatial(a), Inertia::Spatial(b)) => a.dot(b),
            (Inertia::Planar(a), Inertia::Planar(b)) => a * b,
            _ => panic!("mixed inertia kinds"),
        }
    }

    /// `min_alpha ||self - alpha * target|| / ||target||`: how far `self`
    /// is from being a scalar multiple of `target`. Zero for scalars.
    pub fn proportionality_residual(&self, target: &Inertia) -> f64 {
        let tn2 = target.dot(target);
        if tn2 == 0.0 {
            return self.norm();
        }
        let alpha = self.dot(target) / tn2;
        self.add(&target.scaled(-alpha)).norm() / tn2.sqrt()
    }
}

/// A complete virtual-body assignment: one virtual mass (and possibly
/// inertia) per contact, whose sum reproduces the handled body.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualEquivalence {
    pub space: WrenchSpace,
    /// Virtual mass per contact, in contact order; zero at torque-only
    /// slots.
    pub m_star: Vector,
    /// Virtual inertia per contact; empty for translational spaces.
    pub j_star: Vec<Inertia>,
    /// Total virtual mass.
    pub m_star_o: f64,
    /// Virtual body inertia; `None` for translational spaces and in the
    /// pure-torque limit.
    pub j_star_o: Option<Inertia>,
    /// Fraction of the resultant torque carried by pure torques.
    pub beta: f64,
    /// Nonnegative torque fractions over torque-capable contacts (contact
    /// order), summing to 1; empty when no contact carries torque.
    pub torque_weights: Vec<f64>,
    /// Set when `beta = 1`: the virtual inertias diverge and torque duty
    /// is carried entirely by the pure torques.
    pub pure_torque_limit: bool,
}

/// Which constraints the virtual-mass linear system enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceMode {
    /// Mass sum, full inertia match to a target, and CoM placement.
    Full,
    /// Mass sum and CoM placement only; the inertia is whatever the
    /// masses induce.
    Reduced,
}

/// The linear system `R m* = c` whose solutions are the admissible
/// virtual-mass vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceSystem {
    pub r: Matrix,
    pub c: Vector,
    pub mode: EquivalenceMode,
    pub space: WrenchSpace,
    /// Contact index behind each column (force-carrying contacts only).
    pub columns: Vec<usize>,
}

/// How the torque budget is split: `beta` of the resultant torque goes to
/// pure manipulating torques, divided over torque-capable contacts by
/// `weights`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueShare {
    pub beta: f64,
    pub weights: Vec<f64>,
}

impl TorqueShare {
    /// Forces-only split: all torque duty comes from moment arms.
    pub fn forces_only() -> Self {
        TorqueShare {
            beta: 0.0,
            weights: Vec::new(),
        }
    }

    /// Uniform weights over `n` torque-capable contacts.
    pub fn uniform(beta: f64, n: usize) -> Self {
        TorqueShare {
            beta,
            weights: vec![1.0 / n as f64; n],
        }
    }
}

/// Outcome of a virtual-mass solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSolution {
    /// Minimum-norm masses, one per force-carrying contact (system column
    /// order).
    pub m_star: Vector,
    /// False when any mass is meaningfully negative.
    pub feasible: bool,
    /// Columns with negative masses, and the worst value.
    pub negative: Vec<usize>,
    pub min_mass: f64,
    /// `||R m* - c||` of the returned solution.
    pub residual: f64,
}

/// Residuals of the four virtual-equivalence constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceDiagnostics {
    pub mass_sum: f64,
    pub com: f64,
    pub inertia_sum: f64,
    pub proportionality: f64,
    pub pass: bool,
}

/// The six independent entries of `skew(r) skew(r)^T` in the row order
/// used by the full spatial system: xx, yy, zz, xy, xz, yz.
fn spatial_inertia_row(r: &Vector) -> [f64; 6] {
    let (x, y, z) = (r[0], r[1], r[2]);
    [
        y * y + z * z,
        x * x + z * z,
        x * x + y * y,
        -x * y,
        -x * z,
        -y * z,
    ]
}

fn spatial_inertia_entries(j: &Matrix3<f64>) -> [f64; 6] {
    [
        j[(0, 0)],
        j[(1, 1)],
        j[(2, 2)],
        j[(0, 1)],
        j[(0, 2)],
        j[(1, 2)],
    ]
}

/// Assemble the virtual-mass system for a contact set. Only force-carrying
/// contacts contribute columns. Full mode additionally pins the induced
/// inertia to `j_target`.
pub fn build_system(
    cs: &ContactSet,
    m_star_o: f64,
    j_target: Option<&Inertia>,
    mode: EquivalenceMode,
) -> Result<EquivalenceSystem> {
    if m_star_o <= 0.0 {
        return Err(Error::InvalidProblem("total virtual mass must be positive".into()));
    }
    let columns = cs.force_contacts();
    let n = columns.len();
    let fd = cs.space.force_dim();
    let translational = cs.space.torque_dim() == 0;

    let inertia_rows = match (mode, cs.space) {
        (EquivalenceMode::Full, WrenchSpace::Spatial) => 6,
        (EquivalenceMode::Full, WrenchSpace::Planar) => 1,
        (EquivalenceMode::Full, _) => 0,
        (EquivalenceMode::Reduced, _) => 0,
    };
    if mode == EquivalenceMode::Full && !translational && j_target.is_none() {
        return Err(Error::MissingInertiaTarget);
    }
    let com_rows = if translational { 0 } else { fd };

    let rows = 1 + inertia_rows + com_rows;
    let mut r = Matrix::zeros(rows, n);
    let mut c = Vector::zeros(rows);
    c[0] = m_star_o;
    for (col, &i) in columns.iter().enumerate() {
        r[(0, col)] = 1.0;
        let ri = &cs.contacts[i].r;
        match (inertia_rows, cs.space) {
            (6, _) => {
                for (k, v) in spatial_inertia_row(ri).iter().enumerate() {
                    r[(1 + k, col)] = *v;
                }
            }
            (1, _) => r[(1, col)] = ri.norm_squared(),
            _ => {}
        }
        for k in 0..com_rows {
            r[(1 + inertia_rows + k, col)] = ri[k];
        }
    }
    match (inertia_rows, j_target) {
        (6, Some(Inertia::Spatial(j))) => {
            for (k, v) in spatial_inertia_entries(j).iter().enumerate() {
                c[1 + k] = *v;
            }
        }
        (1, Some(Inertia::Planar(j))) => c[1] = *j,
        (0, _) => {}
        _ => return Err(Error::MissingInertiaTarget),
    }
    Ok(EquivalenceSystem {
        r,
        c,
        mode,
        space: cs.space,
        columns,
    })
}

/// Minimum-norm virtual masses for a system, flagging negative entries as
/// infeasible rather than repairing them.
pub fn solve_masses(sys: &EquivalenceSystem, tol: Tolerance) -> Result<MassSolution> {
    let m = solve_min_norm(&sys.r, &sys.c, tol)?;
    let residual = (&sys.r * &m - &sys.c).norm();
    let negative: Vec<usize> = (0..m.len())
        .filter(|&i| m[i] < -tol.residual_eps)
        .collect();
    let min_mass = m.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MassSolution {
        feasible: negative.is_empty(),
        m_star: m,
        negative,
        min_mass,
        residual,
    })
}

/// Nonnegativity-constrained refinement of [`solve_masses`]: an active-set
/// pass that pins negative masses to zero and re-solves over the remaining
/// freedom. Heuristic (no release step); errors if no nonnegative solution
/// is reachable this way.
pub fn solve_masses_nonnegative(sys: &EquivalenceSystem, tol: Tolerance) -> Result<Vector> {
    let n = sys.r.ncols();
    let mut active: Vec<usize> = Vec::new();
    for _ in 0..=n {
        let mut r = Matrix::zeros(sys.r.nrows() + active.len(), n);
        r.rows_mut(0, sys.r.nrows()).copy_from(&sys.r);
        for (k, &i) in active.iter().enumerate() {
            r[(sys.r.nrows() + k, i)] = 1.0;
        }
        let mut c = Vector::zeros(r.nrows());
        c.rows_mut(0, sys.c.len()).copy_from(&sys.c);
        let m = solve_min_norm(&r, &c, tol)
            .map_err(|_| Error::Infeasible("no nonnegative virtual-mass solution".into()))?;
        let worst = (0..n)
            .filter(|i| !active.contains(i))
            .min_by(|&a, &b| m[a].partial_cmp(&m[b]).unwrap());
        match worst {
            Some(i) if m[i] < -tol.residual_eps => active.push(i),
            _ => {
                // clamp the pinned entries exactly
                let mut out = m;
                for &i in &active {
                    out[i] = 0.0;
                }
                return Ok(out);
            }
        }
    }
    Err(Error::Infeasible(
        "no nonnegative virtual-mass solution".into(),
    ))
}

/// `sum_i skew(r_i) m*_i skew(r_i)^T` — the rotational inertia the virtual
/// masses induce about the CoM. `None` for translational spaces.
///
/// `m_star` may be given per force-carrying contact or per contact.
pub fn induced_inertia(cs: &ContactSet, m_star: &Vector) -> Result<Option<Inertia>> {
    let m_full = expand_masses(cs, m_star)?;
    match cs.space {
        WrenchSpace::Spatial => {
            let mut j = Matrix3::zeros();
            for i in 0..cs.len() {
                let s = skew(&cs.r3(i));
                j += s * m_full[i] * s.transpose();
            }
            Ok(Some(Inertia::Spatial(j)))
        }
        WrenchSpace::Planar => {
            let mut j = 0.0;
            for i in 0..cs.len() {
                j += m_full[i] * cs.contacts[i].r.norm_squared();
            }
            Ok(Some(Inertia::Planar(j)))
        }
        _ => Ok(None),
    }
}

/// Scatter a per-force-contact mass vector into a per-contact vector
/// (zeros at torque-only slots); full-length vectors pass through.
pub(crate) fn expand_masses(cs: &ContactSet, m_star: &Vector) -> Result<Vector> {
    if m_star.len() == cs.len() {
        return Ok(m_star.clone());
    }
    let cols = cs.force_contacts();
    if m_star.len() != cols.len() {
        return Err(Error::DimensionMismatch {
            expected: cols.len(),
            got: m_star.len(),
        });
    }
    let mut full = Vector::zeros(cs.len());
    for (k, &i) in cols.iter().enumerate() {
        full[i] = m_star[k];
    }
    Ok(full)
}

/// Split the torque duty between moment arms and pure torques, producing a
/// complete virtual-body assignment.
///
/// With `beta = 0` the virtual body's inertia is exactly the induced
/// inertia and every per-contact inertia is zero. For `0 < beta < 1` the
/// torque-capable contacts receive inertia `w_i (beta/(1-beta)) J_f` and
/// the body inertia inflates to `J_f/(1-beta)`. `beta = 1` is kept as a
/// symbolic limit rather than a huge-number inertia.
pub fn assign_torque_share(
    cs: &ContactSet,
    m_star: &Vector,
    share: &TorqueShare,
) -> Result<VirtualEquivalence> {
    let m_full = expand_masses(cs, m_star)?;
    let torque_slots = cs.torque_contacts();
    if share.beta > 0.0 && torque_slots.is_empty() {
        return Err(Error::NoTorqueContacts);
    }
    if !(0.0..=1.0).contains(&share.beta) {
        return Err(Error::InvalidProblem("beta must lie in [0, 1]".into()));
    }
    let weights = if torque_slots.is_empty() {
        Vec::new()
    } else if share.weights.is_empty() {
        vec![1.0 / torque_slots.len() as f64; torque_slots.len()]
    } else {
        if share.weights.len() != torque_slots.len() {
            return Err(Error::DimensionMismatch {
                expected: torque_slots.len(),
                got: share.weights.len(),
            });
        }
        share.weights.clone()
    };

    let m_star_o = m_full.sum();
    let j_f = induced_inertia(cs, &m_full)?;
    let translational = cs.space.torque_dim() == 0;
    let pure_torque_limit = !translational && share.beta >= 1.0;

    let (j_star, j_star_o) = if translational {
        (Vec::new(), None)
    } else {
        let j_f = j_f.expect("rotational space has induced inertia");
        let mut per = vec![Inertia::zero(cs.space).unwrap(); cs.len()];
        let body = if pure_torque_limit {
            None
        } else if share.beta > 0.0 {
            let factor = share.beta / (1.0 - share.beta);
            for (k, &i) in torque_slots.iter().enumerate() {
                per[i] = j_f.scaled(weights[k] * factor);
            }
            Some(j_f.scaled(1.0 / (1.0 - share.beta)))
        } else {
            Some(j_f)
        };
        (per, body)
    };

    Ok(VirtualEquivalence {
        space: cs.space,
        m_star: m_full,
        j_star,
        m_star_o,
        j_star_o,
        beta: share.beta,
        torque_weights: weights,
        pure_torque_limit,
    })
}

impl VirtualEquivalence {
    /// Relative deviation of the assigned body inertia from a pinned
    /// target; `Some(residual)` when it exceeds `residual_eps`, as happens
    /// when a torque share is combined with a full-mode inertia target.
    pub fn target_conflict(&self, target: &Inertia, tol: Tolerance) -> Option<f64> {
        let dev = match &self.j_star_o {
            Some(j) => j.add(&target.scaled(-1.0)).norm() / target.norm().max(1.0),
            None => f64::INFINITY,
        };
        (dev > tol.residual_eps).then_some(dev)
    }
}

/// Evaluate the four equivalence constraints: mass sum, CoM placement,
/// inertia sum and proportionality of every contributing inertia to the
/// body inertia.
pub fn check_equivalence(
    ve: &VirtualEquivalence,
    cs: &ContactSet,
    tol: Tolerance,
) -> Result<EquivalenceDiagnostics> {
    if ve.m_star.len() != cs.len() {
        return Err(Error::DimensionMismatch {
            expected: cs.len(),
            got: ve.m_star.len(),
        });
    }
    let mass_sum = (ve.m_star.sum() - ve.m_star_o).abs();
    let mut com = Vector::zeros(cs.space.force_dim());
    for i in 0..cs.len() {
        com += &cs.contacts[i].r * ve.m_star[i];
    }
    let com = com.norm();

    let (inertia_sum, proportionality) = match (&ve.j_star_o, ve.pure_torque_limit) {
        (_, true) | (None, _) => (0.0, 0.0),
        (Some(j_o), false) => {
            let j_f = induced_inertia(cs, &ve.m_star)?
                .expect("rotational space has induced inertia");
            let mut total = j_f.clone();
            for j in &ve.j_star {
                total = total.add(j);
            }
            let sum_res = total.add(&j_o.scaled(-1.0)).norm();
            let mut prop: f64 = j_f.proportionality_residual(j_o);
            for j in &ve.j_star {
                if j.norm() > 0.0 {
                    prop = prop.max(j.proportionality_residual(j_o));
                }
            }
            (sum_res, prop)
        }
    };

    let pass = mass_sum <= tol.residual_eps
        && com <= tol.residual_eps
        && inertia_sum <= tol.residual_eps
        && proportionality <= tol.residual_eps;
    Ok(EquivalenceDiagnostics {
        mass_sum,
        com,
        inertia_sum,
        proportionality,
        pass,
    })
}

/// Dimension of the feasible family of manipulating wrench distributions:
/// one per torque slot plus the nullity of the mass system.
pub fn solution_dimension(sys: &EquivalenceSystem, n_torque_slots: usize) -> usize {
    let tol = Tolerance::default();
    n_torque_slots + sys.r.ncols() - rank(&sys.r, tol)
}

/// Null-space basis of the mass system (mass directions that preserve all
/// enforced constraints).
pub fn mass_null_space(sys: &EquivalenceSystem, tol: Tolerance) -> Matrix {
    null_space_basis(&sys.r, tol)
}
