//! Wrench analysis: split observed applied wrenches into a manipulating
//! part that moves the body and a constraint part that only loads it
//! internally. The constrained-dynamics (Udwadia–Kalaba style) formula is
//! implemented alongside as an independent oracle and for moving-body
//! centripetal cases.

use crate::equivalence::{
    assign_torque_share, solve_masses, EquivalenceSystem, Inertia, TorqueShare,
    VirtualEquivalence,
};
use crate::error::{Error, Result};
use crate::model::{ContactSet, Wrench};
use crate::nullspaces::{build_model, internal_state, InternalState, NullSpaceModel};
use crate::numerics::{pseudo_inverse, sym_sqrt3, Matrix, Tolerance, Vector};
use crate::synthesis::synthesize;

/// Result of splitting an applied stack `h` into `h_m + (-h_c)`... more
/// precisely `h_m = h + h_c`: the constraint wrenches are what must be
/// *added* to the applied wrenches to obtain a pure manipulating set.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub h_o: Wrench,
    pub h_m: Vector,
    pub h_c: Vector,
    pub lambda_c: InternalState,
    pub model: NullSpaceModel,
}

/// Kinematic constraint system tying the per-contact accelerations to a
/// single rigid motion, referenced to the first contact: `A xdd = b` with
/// `b` holding the centripetal terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub a: Matrix,
    pub b: Vector,
    /// Per-contact state width (`force_dim + torque_dim`).
    pub slot: usize,
}

/// Decompose an applied wrench stack: compute its resultant, synthesize
/// the manipulating distribution for the chosen torque share, and read
/// off `h_c = h_m - h` and its internal-state coordinates.
pub fn decompose(
    h: &Vector,
    cs: &ContactSet,
    sys: &EquivalenceSystem,
    share: &TorqueShare,
) -> Result<Decomposition> {
    let tol = Tolerance::default();
    let h_o = cs.resultant(h)?;
    let sol = solve_masses(sys, tol)?;
    if !sol.feasible {
        return Err(Error::Infeasible(
            "minimum-norm virtual masses are negative".into(),
        ));
    }
    let ve = assign_torque_share(cs, &sol.m_star, share)?;
    let h_m = synthesize(&h_o, cs, &ve)?;
    let h_c = &h_m - h;
    let model = build_model(&h_o, cs, sys, true)?;
    let lambda_c = internal_state(&h_c, &model.z)?;
    Ok(Decomposition {
        h_o,
        h_m,
        h_c,
        lambda_c,
        model,
    })
}

/// Build the kinematic constraint matrices for a contact set with given
/// per-contact angular velocities (one `torque_dim` vector per contact;
/// pass zeros for a body at rest).
///
/// The state vector stacks `[linear_i; angular_i]` per contact — every
/// contact gets a full slot regardless of its wrench model; inertia-based
/// exclusions happen in [`uk_constraint_wrenches`].
pub fn constraint_matrices(cs: &ContactSet, omega: &[Vector]) -> Result<ConstraintSystem> {
    let n = cs.len();
    if n < 2 {
        return Err(Error::TooFewContacts);
    }
    if omega.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: omega.len(),
        });
    }
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let slot = fd + td;
    let rows_per = slot; // fd translational rows + td rotational rows
    let mut a = Matrix::zeros(rows_per * (n - 1), slot * n);
    let mut b = Vector::zeros(rows_per * (n - 1));
    for j in 1..n {
        let row = rows_per * (j - 1);
        let r_j1 = &cs.contacts[j].r - &cs.contacts[0].r;
        // translational rows: p_j'' - p_1'' - omegadot_1 x r_j1 = w_j x (w_j x r_j1)
        for k in 0..fd {
            a[(row + k, k)] = -1.0;
            a[(row + k, slot * j + k)] = 1.0;
        }
        // the omegadot_1 block maps wdot to -(wdot x r_j1)
        for t in 0..td {
            let mut unit = Vector::zeros(td);
            unit[t] = 1.0;
            let col = cs.space.angular_cross_r(&unit, &r_j1);
            for k in 0..fd {
                a[(row + k, fd + t)] = -col[k];
            }
        }
        // rotational rows: omegadot_j = omegadot_1
        for t in 0..td {
            a[(row + fd + t, fd + t)] = -1.0;
            a[(row + fd + t, slot * j + fd + t)] = 1.0;
        }
        // centripetal term w_j x (w_j x r_j1)
        if td > 0 {
            let inner = cs.space.angular_cross_r(&omega[j], &r_j1);
            let cent = match td {
                1 => {
                    let w = omega[j][0];
                    Vector::from_vec(vec![-w * inner[1], w * inner[0]])
                }
                _ => {
                    let w = nalgebra::Vector3::new(omega[j][0], omega[j][1], omega[j][2]);
                    let v = nalgebra::Vector3::new(inner[0], inner[1], inner[2]);
                    let c = w.cross(&v);
                    Vector::from_column_slice(c.as_slice())
                }
            };
            b.rows_mut(row, fd).copy_from(&cent);
        }
    }
    Ok(ConstraintSystem { a, b, slot })
}

fn inertia_is_pd(j: &Inertia) -> bool {
    match j {
        Inertia::Spatial(m) => {
            nalgebra::linalg::SymmetricEigen::new(*m)
                .eigenvalues
                .iter()
                .all(|&e| e > 0.0)
        }
        Inertia::Planar(j) => *j > 0.0,
    }
}

/// State indices of the slots with positive virtual inertia, paired with
/// their positions in the wrench stack. Errors if a force-carrying slot
/// has zero mass.
fn included_slots(cs: &ContactSet, ve: &VirtualEquivalence) -> Result<Vec<(usize, usize)>> {
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let slot = fd + td;
    let mut map = Vec::new();
    for i in 0..cs.len() {
        let c = &cs.contacts[i];
        if c.model.carries_force() {
            if ve.m_star[i] <= 0.0 {
                return Err(Error::SingularMass);
            }
            for k in 0..fd {
                map.push((slot * i + k, cs.contact_offset(i) + k));
            }
        }
        if c.model.carries_torque() && !ve.j_star.is_empty() && inertia_is_pd(&ve.j_star[i]) {
            let woff = cs.contact_offset(i) + if c.model.carries_force() { fd } else { 0 };
            for k in 0..td {
                map.push((slot * i + fd + k, woff + k));
            }
        }
    }
    Ok(map)
}

/// Wrench-stack indices covered by the positive-inertia constraint state:
/// entries of a [`uk_constraint_wrenches`] result outside this set are
/// structurally zero.
pub fn uk_covered_indices(cs: &ContactSet, ve: &VirtualEquivalence) -> Result<Vec<usize>> {
    Ok(included_slots(cs, ve)?.into_iter().map(|(_, w)| w).collect())
}

fn mass_sqrt_blocks(
    cs: &ContactSet,
    ve: &VirtualEquivalence,
    map: &[(usize, usize)],
) -> (Matrix, Matrix) {
    let fd = cs.space.force_dim();
    let slot = fd + cs.space.torque_dim();
    let p = map.len();
    let mut half = Matrix::zeros(p, p);
    let mut inv_half = Matrix::zeros(p, p);
    // group consecutive map entries by (contact, block kind)
    let mut k = 0;
    while k < p {
        let (state_idx, _) = map[k];
        let i = state_idx / slot;
        if state_idx % slot < fd {
            let s = ve.m_star[i].sqrt();
            for d in 0..fd {
                half[(k + d, k + d)] = s;
                inv_half[(k + d, k + d)] = 1.0 / s;
            }
            k += fd;
        } else {
            match &ve.j_star[i] {
                Inertia::Spatial(m) => {
                    let sq = sym_sqrt3(m);
                    let sq_inv = sq.try_inverse().expect("positive-definite inertia");
                    for a in 0..3 {
                        for bcol in 0..3 {
                            half[(k + a, k + bcol)] = sq[(a, bcol)];
                            inv_half[(k + a, k + bcol)] = sq_inv[(a, bcol)];
                        }
                    }
                    k += 3;
                }
                Inertia::Planar(j) => {
                    half[(k, k)] = j.sqrt();
                    inv_half[(k, k)] = 1.0 / j.sqrt();
                    k += 1;
                }
            }
        }
    }
    (half, inv_half)
}

/// Explicit constraint wrenches from the constrained-dynamics formula
/// `h_c = M^(1/2) B^+ (b - A xdd_desired)` with `B = A M^(-1/2)`, where
/// `M` is the block-diagonal virtual inertia over the positive-inertia
/// slots. Zero-inertia slots are removed from the constraint system by
/// eliminating their columns against the left null space of the excluded
/// block, and their constraint wrenches are zero.
///
/// The result is laid out like the wrench stack of `cs`.
pub fn uk_constraint_wrenches(
    sysc: &ConstraintSystem,
    cs: &ContactSet,
    ve: &VirtualEquivalence,
    x_dd_desired: &Vector,
) -> Result<Vector> {
    if x_dd_desired.len() != sysc.a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: sysc.a.ncols(),
            got: x_dd_desired.len(),
        });
    }
    let tol = Tolerance::default();
    let map = included_slots(cs, ve)?;
    let p = map.len();
    let state_dim = sysc.a.ncols();
    let excluded: Vec<usize> = (0..state_dim)
        .filter(|i| !map.iter().any(|&(s, _)| s == *i))
        .collect();

    let a_inc = Matrix::from_fn(sysc.a.nrows(), p, |r, c| sysc.a[(r, map[c].0)]);
    let (a_red, b_red, e_inc) = if excluded.is_empty() {
        (a_inc, sysc.b.clone(), None)
    } else {
        // eliminate the excluded (free) columns: project the constraint
        // rows onto the left null space of the excluded block
        let a_exc = Matrix::from_fn(sysc.a.nrows(), excluded.len(), |r, c| {
            sysc.a[(r, excluded[c])]
        });
        let n = crate::numerics::null_space_basis(&a_exc.transpose(), tol);
        (
            n.transpose() * &a_inc,
            n.transpose() * &sysc.b,
            Some(excluded),
        )
    };
    let _ = e_inc;

    let xdd_inc = Vector::from_fn(p, |i, _| x_dd_desired[map[i].0]);
    let (m_half, m_inv_half) = mass_sqrt_blocks(cs, ve, &map);
    let b_mat = &a_red * &m_inv_half;
    let e = &b_red - &a_red * &xdd_inc;
    let h_inc = &m_half * pseudo_inverse(&b_mat, tol) * e;

    let mut out = Vector::zeros(cs.stack_dim());
    for (i, &(_, wrench_idx)) in map.iter().enumerate() {
        out[wrench_idx] = h_inc[i];
    }
    Ok(out)
}

/// Per-slot unconstrained accelerations `(M*_i)^-1 h_i` in the constraint
/// state layout; zero-inertia slots get zero (they are excluded from the
/// solve anyway).
pub fn unconstrained_accelerations(
    cs: &ContactSet,
    ve: &VirtualEquivalence,
    h: &Vector,
) -> Result<Vector> {
    if h.len() != cs.stack_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.stack_dim(),
            got: h.len(),
        });
    }
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let slot = fd + td;
    let mut xdd = Vector::zeros(slot * cs.len());
    for i in 0..cs.len() {
        let mut off = cs.contact_offset(i);
        let c = &cs.contacts[i];
        if c.model.carries_force() && ve.m_star[i] > 0.0 {
            for k in 0..fd {
                xdd[slot * i + k] = h[off + k] / ve.m_star[i];
            }
            off += fd;
        }
        if c.model.carries_torque() && !ve.j_star.is_empty() && inertia_is_pd(&ve.j_star[i]) {
            let t = h.rows(off, td).into_owned();
            let w = match &ve.j_star[i] {
                Inertia::Spatial(m) => {
                    let inv = m.try_inverse().ok_or(Error::SingularInertia)?;
                    let r = inv * nalgebra::Vector3::new(t[0], t[1], t[2]);
                    Vector::from_column_slice(r.as_slice())
                }
                Inertia::Planar(j) => Vector::from_vec(vec![t[0] / *j]),
            };
            for k in 0..td {
                xdd[slot * i + fd + k] = w[k];
            }
        }
    }
    Ok(xdd)
}
