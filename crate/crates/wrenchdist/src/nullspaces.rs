//! Structure of the full solution set: the particular manipulating
//! distribution, the basis `K` of redistribution directions that keep the
//! resultant fixed (the manipulating null space), the basis `Z` of
//! internal-load directions orthogonal to it (the constraining null
//! space), and the coordinates that locate a given wrench set in them.

use crate::equivalence::{
    assign_torque_share, solve_masses, EquivalenceSystem, Inertia, TorqueShare,
};
use crate::error::{Error, Result};
use crate::model::{ContactSet, Wrench};
use crate::numerics::{
    apply_sign_convention, null_space_basis, orthonormalize, rank, Matrix, Tolerance, Vector,
};
use crate::synthesis::synthesize;

/// Particular solution plus orthonormal bases of the two null-space
/// factors of the wrench stack.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceModel {
    /// Forces-only minimum-norm manipulating distribution.
    pub h_mp: Vector,
    /// Orthonormal basis of the manipulating directions (may be empty).
    pub k: Matrix,
    /// Orthonormal basis of the constraining directions (may be empty).
    pub z: Matrix,
    /// Realized manipulating dimension, `k.ncols()`.
    pub d: usize,
    /// Dropped or anomalous directions, if any.
    pub diagnostics: Vec<String>,
}

/// Coordinates of a constraint wrench set in the `Z` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalState {
    pub lambda_c: Vector,
}

/// The forces-only minimum-norm manipulating distribution: synthesize
/// with the minimum-norm virtual masses and no torque share.
pub fn particular_solution(
    h_o: &Wrench,
    cs: &ContactSet,
    sys: &EquivalenceSystem,
) -> Result<Vector> {
    let tol = Tolerance::default();
    let sol = solve_masses(sys, tol)?;
    if !sol.feasible {
        return Err(Error::Infeasible(
            "minimum-norm virtual masses are negative".into(),
        ));
    }
    let ve = assign_torque_share(cs, &sol.m_star, &TorqueShare::forces_only())?;
    synthesize(h_o, cs, &ve)
}

fn inertia_solve(j: &Inertia, w: &Vector) -> Result<Vector> {
    match j {
        Inertia::Spatial(m) => {
            let inv = m.try_inverse().ok_or(Error::SingularInertia)?;
            let r = inv * nalgebra::Vector3::new(w[0], w[1], w[2]);
            Ok(Vector::from_column_slice(r.as_slice()))
        }
        Inertia::Planar(j) => {
            if *j == 0.0 {
                return Err(Error::SingularInertia);
            }
            Ok(Vector::from_vec(vec![w[0] / *j]))
        }
    }
}

/// Basis of the manipulating directions around the particular solution.
///
/// Mass directions are sampled by central finite differences along each
/// null direction of the mass system (step `1e-4 * m*_o`); torque
/// directions are exact: a unit torque along `t_o` at the slot, cancelled
/// at the force slots through the inverse body inertia. Degenerate
/// samples are dropped and reported in the diagnostics rather than
/// papering over a dimension loss.
pub fn manipulating_basis(
    h_o: &Wrench,
    cs: &ContactSet,
    sys: &EquivalenceSystem,
    use_torque_slots: bool,
) -> Result<(Matrix, Vec<String>)> {
    let tol = Tolerance::default();
    let sol = solve_masses(sys, tol)?;
    let m0 = &sol.m_star;
    let mut dirs: Vec<Vector> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    let g = cs.grasp_matrix();
    let scale = 1.0_f64.max(h_o.norm());

    let n_mass = null_space_basis(&sys.r, tol);
    let eps = 1e-4 * sys.c[0];
    for j in 0..n_mass.ncols() {
        let u = n_mass.column(j).into_owned();
        let synth = |m: Vector| -> Result<Vector> {
            let ve = assign_torque_share(cs, &m, &TorqueShare::forces_only())?;
            synthesize(h_o, cs, &ve)
        };
        let hp = synth(m0 + &u * eps)?;
        let hm = synth(m0 - &u * eps)?;
        let d = (hp - hm) / 2.0;
        if d.norm() < 1e-12 {
            notes.push(format!(
                "mass direction {j} produced no wrench change; column dropped"
            ));
            continue;
        }
        dirs.push(d);
    }

    let torque_slots = cs.torque_contacts();
    if use_torque_slots && !torque_slots.is_empty() {
        if h_o.torque.norm() <= tol.residual_eps {
            notes.push(format!(
                "resultant torque is zero: {} torque directions undefined and dropped",
                torque_slots.len()
            ));
        } else {
            let u_o = &h_o.torque / h_o.torque.norm();
            let ve0 = assign_torque_share(cs, m0, &TorqueShare::forces_only())?;
            let j_o = ve0.j_star_o.as_ref().ok_or(Error::SingularInertia)?;
            let w = inertia_solve(j_o, &u_o)?;
            let fd = cs.space.force_dim();
            let td = cs.space.torque_dim();
            for &slot in &torque_slots {
                let mut d = Vector::zeros(cs.stack_dim());
                let mut off = cs.contact_offset(slot);
                if cs.contacts[slot].model.carries_force() {
                    off += fd;
                }
                d.rows_mut(off, td).copy_from(&u_o);
                for i in cs.force_contacts() {
                    let df = cs.space.angular_cross_r(&w, &cs.contacts[i].r) * -ve0.m_star[i];
                    let foff = cs.contact_offset(i);
                    let cur = d.rows(foff, fd) + df;
                    d.rows_mut(foff, fd).copy_from(&cur);
                }
                dirs.push(d);
            }
        }
    }

    // verify each direction really preserves the resultant
    dirs.retain(|d| {
        let res = (&g * d).norm();
        if res > 1e-9 * scale.max(d.norm()) {
            notes.push(format!(
                "sampled direction leaves the resultant null space (residual {res:.3e}); dropped"
            ));
            false
        } else {
            true
        }
    });

    let mut k = if dirs.is_empty() {
        Matrix::zeros(cs.stack_dim(), 0)
    } else {
        let raw = Matrix::from_columns(&dirs);
        orthonormalize(&raw, tol.rank_eps)
    };
    apply_sign_convention(&mut k, tol.rank_eps);
    Ok((k, notes))
}

/// Basis of the constraining directions: the null space of `[G; K^T]` —
/// directions invisible to the resultant and orthogonal to every
/// manipulating direction.
pub fn constraint_basis(g: &Matrix, k: &Matrix, tol: Tolerance) -> Matrix {
    let mut stacked = Matrix::zeros(g.nrows() + k.ncols(), g.ncols());
    stacked.rows_mut(0, g.nrows()).copy_from(g);
    stacked
        .rows_mut(g.nrows(), k.ncols())
        .copy_from(&k.transpose());
    null_space_basis(&stacked, tol)
}

/// Coordinates of a constraint wrench set in the orthonormal `Z` basis:
/// `lambda_c = Z^T h_c`.
pub fn internal_state(h_c: &Vector, z: &Matrix) -> Result<InternalState> {
    if z.ncols() > 0 && h_c.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            expected: z.nrows(),
            got: h_c.len(),
        });
    }
    Ok(InternalState {
        lambda_c: z.transpose() * h_c,
    })
}

/// Assemble the full model for a resultant wrench: particular solution,
/// manipulating basis and constraining basis.
pub fn build_model(
    h_o: &Wrench,
    cs: &ContactSet,
    sys: &EquivalenceSystem,
    use_torque_slots: bool,
) -> Result<NullSpaceModel> {
    let tol = Tolerance::default();
    let h_mp = particular_solution(h_o, cs, sys)?;
    let (k, diagnostics) = manipulating_basis(h_o, cs, sys, use_torque_slots)?;
    let z = constraint_basis(&cs.grasp_matrix(), &k, tol);
    Ok(NullSpaceModel {
        h_mp,
        d: k.ncols(),
        k,
        z,
        diagnostics,
    })
}

/// Recombine coordinates into an applied wrench stack:
/// `h = h_mp + K lambda_m - Z lambda_c`.
pub fn compose(model: &NullSpaceModel, lambda_m: &Vector, lambda_c: &Vector) -> Result<Vector> {
    if lambda_m.len() != model.k.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.k.ncols(),
            got: lambda_m.len(),
        });
    }
    if lambda_c.len() != model.z.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.z.ncols(),
            got: lambda_c.len(),
        });
    }
    Ok(&model.h_mp + &model.k * lambda_m - &model.z * lambda_c)
}

/// Audit the model against the expected dimension split:
/// `columns(K) + columns(Z) + rank(G)` must equal the stack dimension.
pub fn dimension_audit(model: &NullSpaceModel, cs: &ContactSet) -> bool {
    let g = cs.grasp_matrix();
    let tol = Tolerance::default();
    model.k.ncols() + model.z.ncols() + rank(&g, tol) == cs.stack_dim()
}
