//! Closed-form wrench synthesis: the parametrized right inverse of the
//! grasp matrix, its historical (incorrect) variant kept as a refutation
//! baseline, the unweighted pseudo-inverse, the three-step virtual-body
//! procedure, and the helicoidal acceleration-field split.

use nalgebra::Matrix3;

use crate::equivalence::{Inertia, VirtualEquivalence};
use crate::error::{Error, Result};
use crate::model::{ContactSet, Wrench, WrenchSpace};
use crate::numerics::{pseudo_inverse, rank, skew, Matrix, Tolerance, Vector};

/// Linear and angular acceleration of a (virtual) rigid body; the angular
/// part is empty in translational spaces and scalar in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyAcceleration {
    pub linear: Vector,
    pub angular: Vector,
}

impl BodyAcceleration {
    pub fn zero(space: WrenchSpace) -> Self {
        BodyAcceleration {
            linear: Vector::zeros(space.force_dim()),
            angular: Vector::zeros(space.torque_dim()),
        }
    }

    pub fn as_vector(&self) -> Vector {
        let mut v = Vector::zeros(self.linear.len() + self.angular.len());
        v.rows_mut(0, self.linear.len()).copy_from(&self.linear);
        v.rows_mut(self.linear.len(), self.angular.len())
            .copy_from(&self.angular);
        v
    }
}

/// The body acceleration split into its force-generated and
/// torque-generated helicoidal parts; the two sum to the full
/// acceleration and the linear part of the torque field is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSplit {
    pub x_f: BodyAcceleration,
    pub x_t: BodyAcceleration,
}

fn inertia_apply(j: &Inertia, w: &Vector) -> Vector {
    match j {
        Inertia::Spatial(m) => {
            let r = m * nalgebra::Vector3::new(w[0], w[1], w[2]);
            Vector::from_column_slice(r.as_slice())
        }
        Inertia::Planar(j) => Vector::from_vec(vec![j * w[0]]),
    }
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

/// Instantaneous acceleration of the virtual body under a resultant
/// wrench: `linear = f_o / m*_o`, `angular = (J*_o)^-1 t_o`.
pub fn body_acceleration(h_o: &Wrench, ve: &VirtualEquivalence) -> Result<BodyAcceleration> {
    if ve.m_star_o <= 0.0 {
        return Err(Error::SingularMass);
    }
    let linear = &h_o.force / ve.m_star_o;
    let angular = match (&ve.j_star_o, ve.space.torque_dim()) {
        (_, 0) => Vector::zeros(0),
        (Some(j), _) => inertia_solve(j, &h_o.torque)?,
        (None, _) => return Err(Error::SingularInertia),
    };
    Ok(BodyAcceleration { linear, angular })
}

/// Acceleration of each contact point when the body accelerates rigidly
/// from rest: `linear_i = linear + angular x r_i`, same angular part
/// everywhere.
pub fn point_accelerations(a: &BodyAcceleration, cs: &ContactSet) -> Vec<BodyAcceleration> {
    (0..cs.len())
        .map(|i| BodyAcceleration {
            linear: &a.linear + cs.space.angular_cross_r(&a.angular, &cs.contacts[i].r),
            angular: a.angular.clone(),
        })
        .collect()
}

fn jo_inverse_matrix(ve: &VirtualEquivalence) -> Result<Matrix> {
    match &ve.j_star_o {
        Some(Inertia::Spatial(m)) => {
            let inv = m.try_inverse().ok_or(Error::SingularInertia)?;
            Ok(Matrix::from_fn(3, 3, |i, k| inv[(i, k)]))
        }
        Some(Inertia::Planar(j)) => {
            if *j == 0.0 {
                return Err(Error::SingularInertia);
            }
            Ok(Matrix::from_element(1, 1, 1.0 / *j))
        }
        None => Err(Error::SingularInertia),
    }
}

/// `skew(r)^T` lifted to the (force_dim x torque_dim) shape of the space:
/// the matrix mapping an angular acceleration to `angular x r`.
fn cross_map_transpose(space: WrenchSpace, r: &Vector) -> Matrix {
    match space {
        WrenchSpace::Spatial => {
            let s = skew(&nalgebra::Vector3::new(r[0], r[1], r[2])).transpose();
            Matrix::from_fn(3, 3, |i, k| s[(i, k)])
        }
        // angular x r = w (-y, x)
        WrenchSpace::Planar => Matrix::from_column_slice(2, 1, &[-r[1], r[0]]),
        _ => Matrix::zeros(space.force_dim(), 0),
    }
}

fn build_pinv(cs: &ContactSet, ve: &VirtualEquivalence, legacy: bool) -> Result<Matrix> {
    if ve.pure_torque_limit {
        return Err(Error::SingularInertia);
    }
    if ve.m_star.len() != cs.len() {
        return Err(Error::DimensionMismatch {
            expected: cs.len(),
            got: ve.m_star.len(),
        });
    }
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let jo_inv = if td > 0 {
        Some(jo_inverse_matrix(ve)?)
    } else {
        None
    };
    let mut g = Matrix::zeros(cs.stack_dim(), cs.space.wrench_dim());
    for i in 0..cs.len() {
        let mut row = cs.contact_offset(i);
        let c = &cs.contacts[i];
        let m_i = ve.m_star[i];
        if c.model.carries_force() {
            for k in 0..fd {
                g[(row + k, k)] = m_i / ve.m_star_o;
            }
            if let Some(jo_inv) = &jo_inv {
                let st = cross_map_transpose(cs.space, &c.r);
                let block = if legacy {
                    // historical form: inverse applied before the moment
                    // arm, which only agrees with the corrected form when
                    // the two commute
                    match cs.space {
                        WrenchSpace::Spatial => jo_inv * &st * m_i,
                        _ => &st * jo_inv * m_i,
                    }
                } else {
                    &st * jo_inv * m_i
                };
                for r in 0..fd {
                    for k in 0..td {
                        g[(row + r, fd + k)] = block[(r, k)];
                    }
                }
            }
            row += fd;
        }
        if c.model.carries_torque() {
            let jo_inv = jo_inv.as_ref().expect("torque slot implies inertia");
            let j_i = &ve.j_star[i];
            let ji = match j_i {
                Inertia::Spatial(m) => Matrix::from_fn(3, 3, |a, b| m[(a, b)]),
                Inertia::Planar(j) => Matrix::from_element(1, 1, *j),
            };
            let block = &ji * jo_inv;
            for r in 0..td {
                for k in 0..td {
                    g[(row + r, fd + k)] = block[(r, k)];
                }
            }
        }
    }
    Ok(g)
}

/// The corrected parametrized right inverse of the grasp matrix: force
/// block `[(m*_i/m*_o) I, m*_i skew(r_i)^T (J*_o)^-1]`, torque block
/// `[0, J*_i (J*_o)^-1]`.
pub fn parametrized_pinv(cs: &ContactSet, ve: &VirtualEquivalence) -> Result<Matrix> {
    build_pinv(cs, ve, false)
}

/// The historical variant with the transposed operator order
/// `m*_i (J*_o)^-1 skew(r_i)^T` in the force block. Kept as a baseline:
/// it is *not* a right inverse of the grasp matrix unless `J*_o` commutes
/// with every moment-arm map.
pub fn legacy_parametrized_pinv(cs: &ContactSet, ve: &VirtualEquivalence) -> Result<Matrix> {
    build_pinv(cs, ve, true)
}

/// True when the fast closed form of [`corollary_closed_form`] provably
/// reproduces the Moore–Penrose inverse: the contact points sum to zero
/// and every contact accepts a full wrench.
pub fn corollary_applicable(cs: &ContactSet, tol: Tolerance) -> bool {
    if cs.space != WrenchSpace::Spatial {
        return false;
    }
    if !cs.contacts.iter().all(|c| c.model.carries_torque() && c.model.carries_force()) {
        return false;
    }
    let sum: nalgebra::Vector3<f64> = (0..cs.len()).map(|i| cs.r3(i)).sum();
    sum.norm() <= tol.residual_eps
}

/// Closed form of the unweighted pseudo-inverse for symmetric rigid
/// grasps: per contact `(1/n) [I, skew(r_i)^T Jbar^-1; 0, Jbar^-1]` with
/// `Jbar = I + (1/n) sum skew(r_i) skew(r_i)^T`.
pub fn corollary_closed_form(cs: &ContactSet) -> Result<Matrix> {
    if cs.space != WrenchSpace::Spatial {
        return Err(Error::UnsupportedContactModel);
    }
    let n = cs.len() as f64;
    let mut jbar = Matrix3::identity();
    for i in 0..cs.len() {
        let s = skew(&cs.r3(i));
        jbar += s * s.transpose() / n;
    }
    let jbar_inv = jbar.try_inverse().ok_or(Error::SingularInertia)?;
    let mut g = Matrix::zeros(cs.stack_dim(), 6);
    for i in 0..cs.len() {
        let row = cs.contact_offset(i);
        let st = skew(&cs.r3(i)).transpose();
        let fb = st * jbar_inv;
        for r in 0..3 {
            g[(row + r, r)] = 1.0 / n;
            for k in 0..3 {
                g[(row + r, 3 + k)] = fb[(r, k)] / n;
                g[(row + 3 + r, 3 + k)] = jbar_inv[(r, k)] / n;
            }
        }
    }
    Ok(g)
}

/// The unweighted Moore–Penrose right inverse `G^T (G G^T)^-1`.
pub fn unweighted_pinv(cs: &ContactSet) -> Result<Matrix> {
    let g = cs.grasp_matrix();
    let tol = Tolerance::default();
    let r = rank(&g, tol);
    if r < cs.space.wrench_dim() {
        return Err(Error::RankDeficient {
            rank: r,
            expected: cs.space.wrench_dim(),
        });
    }
    Ok(pseudo_inverse(&g, tol))
}

fn torque_parallel_check(cs: &ContactSet, h_m: &Vector, t_o: &Vector, tol: Tolerance) -> Result<()> {
    let td = cs.space.torque_dim();
    if td < 2 || t_o.norm() <= tol.residual_eps {
        return Ok(());
    }
    let dir = t_o / t_o.norm();
    for i in 0..cs.len() {
        if !cs.contacts[i].model.carries_torque() {
            continue;
        }
        let off = cs.contact_offset(i)
            + if cs.contacts[i].model.carries_force() {
                cs.space.force_dim()
            } else {
                0
            };
        let t = h_m.rows(off, td).into_owned();
        let norm = t.norm();
        if norm <= tol.residual_eps {
            continue;
        }
        let ortho = (&t - &dir * t.dot(&dir)).norm() / norm;
        if ortho > 1e-9 {
            return Err(Error::Infeasible(format!(
                "manipulating torque at contact {i} deviates from the resultant torque axis \
                 (sine of angle {ortho:.3e})"
            )));
        }
    }
    Ok(())
}

/// Synthesize a manipulating wrench distribution for a prescribed
/// resultant by the three-step virtual-body procedure: accelerate the
/// virtual body, propagate the acceleration to each contact point, and
/// read off each contact's share `h_m,i = M*_i xdd*_i`.
///
/// In the pure-torque limit the algebraic limit is used instead: forces
/// carry `(m*_i/m*_o) f_o` and the weighted torques carry all of `t_o`.
pub fn synthesize(h_o: &Wrench, cs: &ContactSet, ve: &VirtualEquivalence) -> Result<Vector> {
    if ve.m_star.len() != cs.len() {
        return Err(Error::DimensionMismatch {
            expected: cs.len(),
            got: ve.m_star.len(),
        });
    }
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let mut h = Vector::zeros(cs.stack_dim());

    if ve.pure_torque_limit {
        let torque_slots = cs.torque_contacts();
        for i in 0..cs.len() {
            let mut off = cs.contact_offset(i);
            if cs.contacts[i].model.carries_force() {
                let f = &h_o.force * (ve.m_star[i] / ve.m_star_o);
                h.rows_mut(off, fd).copy_from(&f);
                off += fd;
            }
            if cs.contacts[i].model.carries_torque() {
                let k = torque_slots.iter().position(|&s| s == i).unwrap();
                let t = &h_o.torque * ve.torque_weights[k];
                h.rows_mut(off, td).copy_from(&t);
            }
        }
        return Ok(h);
    }

    let a = body_acceleration(h_o, ve)?;
    let points = point_accelerations(&a, cs);
    for i in 0..cs.len() {
        let mut off = cs.contact_offset(i);
        if cs.contacts[i].model.carries_force() {
            let f = &points[i].linear * ve.m_star[i];
            h.rows_mut(off, fd).copy_from(&f);
            off += fd;
        }
        if cs.contacts[i].model.carries_torque() {
            let t = inertia_apply(&ve.j_star[i], &points[i].angular);
            h.rows_mut(off, td).copy_from(&t);
        }
    }
    torque_parallel_check(cs, &h, &h_o.torque, Tolerance::default())?;
    Ok(h)
}

/// Split a manipulating distribution's effect on the body into the
/// force-generated and torque-generated helicoidal fields.
pub fn field_split(h_m: &Vector, cs: &ContactSet, ve: &VirtualEquivalence) -> Result<FieldSplit> {
    if h_m.len() != cs.stack_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.stack_dim(),
            got: h_m.len(),
        });
    }
    let fd = cs.space.force_dim();
    let td = cs.space.torque_dim();
    let mut f_o = Vector::zeros(fd);
    let mut moment = Vector::zeros(td);
    let mut torque = Vector::zeros(td);
    for i in 0..cs.len() {
        let mut off = cs.contact_offset(i);
        if cs.contacts[i].model.carries_force() {
            let f = h_m.rows(off, fd).into_owned();
            moment += cs.space.moment_of_force(&cs.contacts[i].r, &f);
            f_o += f;
            off += fd;
        }
        if cs.contacts[i].model.carries_torque() {
            torque += h_m.rows(off, td).into_owned();
        }
    }
    let linear = &f_o / ve.m_star_o;
    let (ang_f, ang_t) = if td == 0 || ve.pure_torque_limit {
        // in the pure-torque limit the body inertia diverges and both
        // angular fields vanish: the field lines are parallel
        (Vector::zeros(td), Vector::zeros(td))
    } else {
        let j_o = ve.j_star_o.as_ref().ok_or(Error::SingularInertia)?;
        (inertia_solve(j_o, &moment)?, inertia_solve(j_o, &torque)?)
    };
    Ok(FieldSplit {
        x_f: BodyAcceleration {
            linear,
            angular: ang_f,
        },
        x_t: BodyAcceleration {
            linear: Vector::zeros(fd),
            angular: ang_t,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{
        assign_torque_share, build_system, check_equivalence, solve_masses, EquivalenceMode,
        TorqueShare,
    };
    use crate::model::Contact;
    use approx::assert_abs_diff_eq;

    fn v(s: &[f64]) -> Vector {
        Vector::from_column_slice(s)
    }

    fn sphere_forces() -> ContactSet {
        crate::equivalence::tests::sphere_contacts()
    }

    fn sphere_rigid() -> ContactSet {
        let cs = sphere_forces();
        let contacts = cs.contacts.iter().map(|c| Contact::rigid(c.r.clone())).collect();
        ContactSet::new(WrenchSpace::Spatial, contacts).unwrap()
    }

    fn triangle() -> ContactSet {
        crate::equivalence::tests::triangle_contacts()
    }

    fn sphere_ve(cs: &ContactSet, share: TorqueShare) -> VirtualEquivalence {
        let sys = build_system(cs, 4.0, None, EquivalenceMode::Reduced).unwrap();
        let sol = solve_masses(&sys, Tolerance::default()).unwrap();
        assign_torque_share(cs, &sol.m_star, &share).unwrap()
    }

    fn sphere_resultant() -> Wrench {
        // sum of the four applied wrenches of the worked example
        Wrench {
            force: v(&[1.250, 1.0, 3.0]),
            torque: v(&[-0.208, 1.957, 1.846]),
        }
    }

    fn triangle_ve(beta: f64) -> VirtualEquivalence {
        let cs = triangle();
        let share = if beta == 0.0 {
            TorqueShare::forces_only()
        } else {
            TorqueShare::uniform(beta, 1)
        };
        assign_torque_share(&cs, &v(&[1.0, 1.0, 1.0]), &share).unwrap()
    }

    #[test]
    fn zero_wrench_zero_acceleration() {
        let cs = triangle();
        let ve = triangle_ve(0.0);
        let a = body_acceleration(&Wrench::zero(cs.space), &ve).unwrap();
        assert_eq!(a.as_vector().norm(), 0.0);
    }

    #[test]
    fn sphere_body_acceleration_matches_reference() {
        let cs = sphere_forces();
        let ve = sphere_ve(&cs, TorqueShare::forces_only());
        let a = body_acceleration(&sphere_resultant(), &ve).unwrap();
        let expect = [0.313, 0.250, 0.750, -0.087, 0.591, 0.707];
        let got = a.as_vector();
        for i in 0..6 {
            assert_abs_diff_eq!(got[i], expect[i], epsilon = 1e-3);
        }
    }

    #[test]
    fn triangle_body_acceleration() {
        let ve = triangle_ve(0.0);
        let h_o = Wrench {
            force: v(&[1.0, 2.0]),
            torque: v(&[-2.0]),
        };
        let a = body_acceleration(&h_o, &ve).unwrap();
        assert_abs_diff_eq!(a.linear, v(&[1.0 / 3.0, 2.0 / 3.0]), epsilon = 1e-12);
        assert_abs_diff_eq!(a.angular[0], -2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn point_accelerations_parallel_when_no_rotation() {
        let cs = sphere_forces();
        let a = BodyAcceleration {
            linear: v(&[0.2, -0.1, 0.5]),
            angular: v(&[0.0, 0.0, 0.0]),
        };
        for p in point_accelerations(&a, &cs) {
            assert_abs_diff_eq!(p.linear, a.linear, epsilon = 1e-14);
        }
    }

    #[test]
    fn point_acceleration_at_origin_is_body_acceleration() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![Contact::force_only(v(&[0.0, 0.0, 0.0]))],
        )
        .unwrap();
        let a = BodyAcceleration {
            linear: v(&[1.0, 2.0, 3.0]),
            angular: v(&[0.4, -0.5, 0.6]),
        };
        let p = point_accelerations(&a, &cs);
        assert_abs_diff_eq!(p[0].linear, a.linear, epsilon = 1e-14);
    }

    #[test]
    fn triangle_newton_euler_closure() {
        // sum of m_i a_i recovers f_o; sum of moments recovers t_o
        let cs = triangle();
        let ve = triangle_ve(0.0);
        let h_o = Wrench {
            force: v(&[1.0, 2.0]),
            torque: v(&[-2.0]),
        };
        let a = body_acceleration(&h_o, &ve).unwrap();
        let pts = point_accelerations(&a, &cs);
        let mut f = Vector::zeros(2);
        let mut t = 0.0;
        for i in 0..3 {
            let fi = &pts[i].linear * ve.m_star[i];
            t += cs.space.moment_of_force(&cs.contacts[i].r, &fi)[0];
            f += fi;
        }
        assert_abs_diff_eq!(f, h_o.force, epsilon = 1e-12);
        assert_abs_diff_eq!(t, h_o.torque[0], epsilon = 1e-12);
    }

    #[test]
    fn single_contact_pinv_is_identity() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![Contact::rigid(v(&[0.0, 0.0, 0.0]))],
        )
        .unwrap();
        let ve = VirtualEquivalence {
            space: WrenchSpace::Spatial,
            m_star: v(&[1.0]),
            j_star: vec![Inertia::Spatial(Matrix3::identity())],
            m_star_o: 1.0,
            j_star_o: Some(Inertia::Spatial(Matrix3::identity())),
            beta: 1.0,
            torque_weights: vec![1.0],
            pure_torque_limit: false,
        };
        let p = parametrized_pinv(&cs, &ve).unwrap();
        assert_abs_diff_eq!(p, Matrix::identity(6, 6), epsilon = 1e-14);
    }

    #[test]
    fn corrected_pinv_is_right_inverse() {
        let tol = 1e-9;
        for (cs, ve) in [
            (sphere_forces(), sphere_ve(&sphere_forces(), TorqueShare::forces_only())),
            (sphere_rigid(), sphere_ve(&sphere_rigid(), TorqueShare::uniform(0.4, 4))),
            (triangle(), triangle_ve(0.5)),
        ] {
            let p = parametrized_pinv(&cs, &ve).unwrap();
            let gp = cs.grasp_matrix() * &p;
            let id = Matrix::identity(gp.nrows(), gp.ncols());
            assert!((gp - id).norm() < tol);
        }
    }

    #[test]
    fn sphere_forces_only_distribution_matches_reference() {
        let cs = sphere_forces();
        let ve = sphere_ve(&cs, TorqueShare::forces_only());
        let h = synthesize(&sphere_resultant(), &cs, &ve).unwrap();
        // first contact force of the corrected distribution
        assert_abs_diff_eq!(h[0], 0.952, epsilon = 2e-3);
        assert_abs_diff_eq!(h[1], 0.705, epsilon = 2e-3);
        assert_abs_diff_eq!(h[2], 0.562, epsilon = 2e-3);
        // closure
        let res = cs.resultant(&h).unwrap().as_vector();
        assert_abs_diff_eq!(res, sphere_resultant().as_vector(), epsilon = 1e-9);
    }

    #[test]
    fn legacy_distribution_reproduces_flawed_reference() {
        let cs = sphere_forces();
        let ve = sphere_ve(&cs, TorqueShare::forces_only());
        let p = legacy_parametrized_pinv(&cs, &ve).unwrap();
        let h = &p * sphere_resultant().as_vector();
        assert_abs_diff_eq!(h[0], 1.145, epsilon = 2e-3);
        assert_abs_diff_eq!(h[1], 0.627, epsilon = 2e-3);
        assert_abs_diff_eq!(h[2], 0.463, epsilon = 2e-3);
        // its resultant misses the prescribed wrench
        let res = cs.resultant(&h).unwrap().as_vector();
        let wrong = v(&[1.250, 1.0, 3.0, -0.126, 2.690, 1.820]);
        for i in 0..6 {
            assert_abs_diff_eq!(res[i], wrong[i], epsilon = 2e-3);
        }
        assert!((res - sphere_resultant().as_vector()).norm() > 0.1);
    }

    #[test]
    fn legacy_equals_corrected_for_isotropic_inertia() {
        // octahedron of unit contacts: the induced inertia is isotropic,
        // so the operator order in the force block does not matter
        let pts = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            pts.iter().map(|p| Contact::force_only(v(p))).collect(),
        )
        .unwrap();
        let sys = build_system(&cs, 6.0, None, EquivalenceMode::Reduced).unwrap();
        let sol = solve_masses(&sys, Tolerance::default()).unwrap();
        let ve = assign_torque_share(&cs, &sol.m_star, &TorqueShare::forces_only()).unwrap();
        let a = parametrized_pinv(&cs, &ve).unwrap();
        let b = legacy_parametrized_pinv(&cs, &ve).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn unweighted_pinv_equilibrating_forces() {
        let cs = sphere_forces();
        let p = unweighted_pinv(&cs).unwrap();
        let f = &p * sphere_resultant().as_vector();
        assert_abs_diff_eq!(f[0], 0.969, epsilon = 2e-3);
        assert_abs_diff_eq!(f[1], 0.609, epsilon = 2e-3);
        assert_abs_diff_eq!(f[2], 0.478, epsilon = 2e-3);
        // interaction-freedom of the Moore-Penrose distribution
        for r in cs.interaction_residuals(&f).unwrap() {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn corollary_closed_form_matches_pinv_when_symmetric() {
        // three rigid contacts summing to zero
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            (0..3)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                    Contact::rigid(v(&[a.cos(), a.sin(), 0.0]))
                })
                .collect(),
        )
        .unwrap();
        let tol = Tolerance::default();
        assert!(corollary_applicable(&cs, tol));
        let closed = corollary_closed_form(&cs).unwrap();
        let svd = unweighted_pinv(&cs).unwrap();
        assert!((closed - svd).norm() < 1e-9);
    }

    #[test]
    fn corollary_rejected_for_asymmetric_contacts() {
        let cs = sphere_rigid();
        let tol = Tolerance::default();
        assert!(!corollary_applicable(&cs, tol));
        let closed = corollary_closed_form(&cs).unwrap();
        let svd = unweighted_pinv(&cs).unwrap();
        assert!((closed - svd).norm() > 1e-3);
    }

    #[test]
    fn corollary_matches_identity_parametrization() {
        // unit masses and identity inertias on a symmetric rigid set make
        // the parametrized inverse coincide with the unweighted one
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            (0..4)
                .map(|k| {
                    let a = std::f64::consts::FRAC_PI_4 + std::f64::consts::FRAC_PI_2 * k as f64;
                    Contact::rigid(v(&[a.cos(), a.sin(), 0.0]))
                })
                .collect(),
        )
        .unwrap();
        let mut j_o = Matrix3::identity() * 4.0;
        for i in 0..4 {
            let s = skew(&cs.r3(i));
            j_o += s * s.transpose();
        }
        let ve = VirtualEquivalence {
            space: WrenchSpace::Spatial,
            m_star: v(&[1.0; 4]),
            j_star: vec![Inertia::Spatial(Matrix3::identity()); 4],
            m_star_o: 4.0,
            j_star_o: Some(Inertia::Spatial(j_o)),
            beta: 0.5,
            torque_weights: vec![0.25; 4],
            pure_torque_limit: false,
        };
        let p = parametrized_pinv(&cs, &ve).unwrap();
        let u = unweighted_pinv(&cs).unwrap();
        assert!((p - u).norm() < 1e-9);
    }

    #[test]
    fn synthesize_matches_matrix_path() {
        for (cs, ve) in [
            (sphere_forces(), sphere_ve(&sphere_forces(), TorqueShare::forces_only())),
            (sphere_rigid(), sphere_ve(&sphere_rigid(), TorqueShare::uniform(0.4, 4))),
            (triangle(), triangle_ve(0.5)),
        ] {
            let h_o = Wrench::from_vector(
                cs.space,
                &Vector::from_fn(cs.space.wrench_dim(), |i, _| (i as f64 * 0.83 + 0.3).sin()),
            )
            .unwrap();
            let step = synthesize(&h_o, &cs, &ve).unwrap();
            let matrix = parametrized_pinv(&cs, &ve).unwrap() * h_o.as_vector();
            assert_abs_diff_eq!(step, matrix, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthesize_zero_wrench() {
        let cs = triangle();
        let ve = triangle_ve(0.3);
        let h = synthesize(&Wrench::zero(cs.space), &cs, &ve).unwrap();
        assert_eq!(h.norm(), 0.0);
    }

    #[test]
    fn synthesize_scale_invariance() {
        let cs = sphere_rigid();
        let ve = sphere_ve(&cs, TorqueShare::uniform(0.4, 4));
        let h_o = sphere_resultant();
        let base = synthesize(&h_o, &cs, &ve).unwrap();
        for k in [0.1, 2.0, 10.0] {
            let scaled = VirtualEquivalence {
                m_star: &ve.m_star * k,
                j_star: ve.j_star.iter().map(|j| j.scaled(k)).collect(),
                m_star_o: ve.m_star_o * k,
                j_star_o: ve.j_star_o.as_ref().map(|j| j.scaled(k)),
                ..ve.clone()
            };
            let h = synthesize(&h_o, &cs, &scaled).unwrap();
            assert_abs_diff_eq!(h, base, epsilon = 1e-9);
        }
    }

    #[test]
    fn sphere_equal_torque_distribution_matches_reference() {
        let cs = sphere_rigid();
        let ve = sphere_ve(&cs, TorqueShare::uniform(1.0, 4));
        assert!(ve.pure_torque_limit);
        let h = synthesize(&sphere_resultant(), &cs, &ve).unwrap();
        let expect = [0.351, 0.281, 0.842, -0.052, 0.489, 0.462];
        for i in 0..6 {
            assert_abs_diff_eq!(h[i], expect[i], epsilon = 2e-3);
        }
        let res = cs.resultant(&h).unwrap().as_vector();
        assert_abs_diff_eq!(res, sphere_resultant().as_vector(), epsilon = 1e-9);
    }

    #[test]
    fn triangle_half_share_centroid_torque() {
        let cs = triangle();
        let ve = triangle_ve(0.5);
        let h_o = Wrench {
            force: v(&[1.0, 2.0]),
            torque: v(&[-2.0]),
        };
        let h = synthesize(&h_o, &cs, &ve).unwrap();
        // centroid torque slot carries half the resultant torque
        assert_abs_diff_eq!(h[6], -1.0, epsilon = 1e-12);
        let res = cs.resultant(&h).unwrap().as_vector();
        assert_abs_diff_eq!(res, h_o.as_vector(), epsilon = 1e-12);
    }

    #[test]
    fn field_split_forces_only_is_pure_force_field() {
        let cs = triangle();
        let ve = triangle_ve(0.0);
        let h_o = Wrench {
            force: v(&[1.0, 2.0]),
            torque: v(&[-2.0]),
        };
        let h = synthesize(&h_o, &cs, &ve).unwrap();
        let split = field_split(&h, &cs, &ve).unwrap();
        assert_eq!(split.x_t.as_vector().norm(), 0.0);
        let a = body_acceleration(&h_o, &ve).unwrap();
        assert_abs_diff_eq!(split.x_f.as_vector(), a.as_vector(), epsilon = 1e-12);
    }

    #[test]
    fn field_split_triangle_beta_cases() {
        let cs = triangle();
        let h_o = Wrench {
            force: v(&[1.0, 2.0]),
            torque: v(&[-2.0]),
        };
        // forces produce angular accelerations -2/3, -1/6 and 0 as the
        // torque share grows from none to all
        for (beta, expect) in [(0.0, -2.0 / 3.0), (0.5, -1.0 / 6.0), (1.0, 0.0)] {
            let ve = triangle_ve(beta);
            let h = synthesize(&h_o, &cs, &ve).unwrap();
            let split = field_split(&h, &cs, &ve).unwrap();
            assert_abs_diff_eq!(split.x_f.angular[0], expect, epsilon = 1e-12);
            // sum closes to the body acceleration except in the limit,
            // where both angular parts vanish
            if beta < 1.0 {
                let a = body_acceleration(&h_o, &ve).unwrap();
                assert_abs_diff_eq!(
                    split.x_f.as_vector() + split.x_t.as_vector(),
                    a.as_vector(),
                    epsilon = 1e-12
                );
            } else {
                assert_eq!(split.x_t.angular[0], 0.0);
            }
        }
    }

    #[test]
    fn field_split_angular_parts_parallel() {
        let cs = sphere_rigid();
        let ve = sphere_ve(&cs, TorqueShare::uniform(0.3, 4));
        let h = synthesize(&sphere_resultant(), &cs, &ve).unwrap();
        let split = field_split(&h, &cs, &ve).unwrap();
        let a = &split.x_f.angular;
        let b = &split.x_t.angular;
        let cross = (a[1] * b[2] - a[2] * b[1]).hypot(a[2] * b[0] - a[0] * b[2])
            .hypot(a[0] * b[1] - a[1] * b[0]);
        assert!(cross / (a.norm() * b.norm()) < 1e-9);
    }

    #[test]
    fn legacy_is_not_a_right_inverse_for_anisotropic_inertia() {
        let cs = sphere_forces();
        let ve = sphere_ve(&cs, TorqueShare::forces_only());
        let p = legacy_parametrized_pinv(&cs, &ve).unwrap();
        let gp = cs.grasp_matrix() * &p;
        assert!((gp - Matrix::identity(6, 6)).norm() > 1e-3);
    }

    #[test]
    fn pure_torque_limit_rejects_pinv() {
        let cs = sphere_rigid();
        let ve = sphere_ve(&cs, TorqueShare::uniform(1.0, 4));
        assert!(matches!(
            parametrized_pinv(&cs, &ve),
            Err(Error::SingularInertia)
        ));
    }

    #[test]
    fn rank_deficient_grasp_rejected() {
        // two coincident pure-force contacts can never span the torque rows
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::force_only(v(&[0.0, 0.0, 0.0])),
                Contact::force_only(v(&[0.0, 0.0, 0.0])),
            ],
        )
        .unwrap();
        assert!(matches!(
            unweighted_pinv(&cs),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn synthesized_equivalences_stay_valid() {
        let tol = Tolerance::default();
        let cs = sphere_rigid();
        for beta in [0.0, 0.25, 0.6] {
            let ve = sphere_ve(&cs, TorqueShare::uniform(beta, 4));
            assert!(check_equivalence(&ve, &cs, tol).unwrap().pass);
        }
    }
}
