//! Wrench spaces, contact sets, grasp matrices and the interaction-force
//! test: the static geometry layer.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::numerics::{skew, Matrix, Vector};

/// Ambient space in which forces and torques live.
///
/// The planar and translational variants let the 2-D examples and the full
/// 3-D case share one code path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrenchSpace {
    /// 3-D forces, 3-D torques.
    Spatial,
    /// 2-D forces, scalar torque about the plane normal.
    Planar,
    /// 2-D forces only.
    Translational2,
    /// 3-D forces only.
    Translational3,
}

impl WrenchSpace {
    pub fn force_dim(&self) -> usize {
        match self {
            WrenchSpace::Spatial | WrenchSpace::Translational3 => 3,
            WrenchSpace::Planar | WrenchSpace::Translational2 => 2,
        }
    }

    pub fn torque_dim(&self) -> usize {
        match self {
            WrenchSpace::Spatial => 3,
            WrenchSpace::Planar => 1,
            WrenchSpace::Translational2 | WrenchSpace::Translational3 => 0,
        }
    }

    pub fn wrench_dim(&self) -> usize {
        self.force_dim() + self.torque_dim()
    }

    /// `angular x r` specialized per space; `angular` has `torque_dim`
    /// entries and the result has `force_dim` entries.
    pub fn angular_cross_r(&self, angular: &Vector, r: &Vector) -> Vector {
        match self.torque_dim() {
            0 => Vector::zeros(self.force_dim()),
            1 => {
                let w = angular[0];
                Vector::from_vec(vec![-w * r[1], w * r[0]])
            }
            _ => {
                let a = Vector3::new(angular[0], angular[1], angular[2]);
                let rv = Vector3::new(r[0], r[1], r[2]);
                let c = a.cross(&rv);
                Vector::from_vec(vec![c.x, c.y, c.z])
            }
        }
    }

    /// Moment `r x f` specialized per space (`torque_dim` entries).
    pub fn moment_of_force(&self, r: &Vector, f: &Vector) -> Vector {
        match self.torque_dim() {
            0 => Vector::zeros(0),
            1 => Vector::from_vec(vec![r[0] * f[1] - r[1] * f[0]]),
            _ => {
                let rv = Vector3::new(r[0], r[1], r[2]);
                let fv = Vector3::new(f[0], f[1], f[2]);
                let m = rv.cross(&fv);
                Vector::from_vec(vec![m.x, m.y, m.z])
            }
        }
    }
}

/// A force-torque pair in some [`WrenchSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wrench {
    pub force: Vector,
    pub torque: Vector,
}

impl Wrench {
    pub fn zero(space: WrenchSpace) -> Self {
        Wrench {
            force: Vector::zeros(space.force_dim()),
            torque: Vector::zeros(space.torque_dim()),
        }
    }

    pub fn from_vector(space: WrenchSpace, v: &Vector) -> Result<Self> {
        if v.len() != space.wrench_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.wrench_dim(),
                got: v.len(),
            });
        }
        Ok(Wrench {
            force: v.rows(0, space.force_dim()).into_owned(),
            torque: v.rows(space.force_dim(), space.torque_dim()).into_owned(),
        })
    }

    pub fn as_vector(&self) -> Vector {
        let mut v = Vector::zeros(self.force.len() + self.torque.len());
        v.rows_mut(0, self.force.len()).copy_from(&self.force);
        v.rows_mut(self.force.len(), self.torque.len())
            .copy_from(&self.torque);
        v
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

/// What a kinematic chain can transmit through a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactModel {
    /// Point contact: pure force.
    ForceOnly,
    /// Rigid contact: force and torque.
    ForceAndTorque,
    /// Pure torque (e.g. a moment applied at the centroid with no force).
    TorqueOnly,
}

impl ContactModel {
    pub fn carries_force(&self) -> bool {
        !matches!(self, ContactModel::TorqueOnly)
    }

    pub fn carries_torque(&self) -> bool {
        !matches!(self, ContactModel::ForceOnly)
    }
}

/// Application point (w.r.t. the CoM) plus contact model.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub r: Vector,
    pub model: ContactModel,
}

impl Contact {
    pub fn force_only(r: Vector) -> Self {
        Contact {
            r,
            model: ContactModel::ForceOnly,
        }
    }

    pub fn rigid(r: Vector) -> Self {
        Contact {
            r,
            model: ContactModel::ForceAndTorque,
        }
    }

    pub fn torque_only(r: Vector) -> Self {
        Contact {
            r,
            model: ContactModel::TorqueOnly,
        }
    }
}

/// Ordered contacts sharing one wrench space.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    pub space: WrenchSpace,
    pub contacts: Vec<Contact>,
}

impl ContactSet {
    pub fn new(space: WrenchSpace, contacts: Vec<Contact>) -> Result<Self> {
        if contacts.is_empty() {
            return Err(Error::InvalidProblem("contact set is empty".into()));
        }
        for c in &contacts {
            if c.r.len() != space.force_dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.force_dim(),
                    got: c.r.len(),
                });
            }
            if c.model.carries_torque() && space.torque_dim() == 0 {
                return Err(Error::UnsupportedContactModel);
            }
        }
        Ok(ContactSet { space, contacts })
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    /// Wrench-stack dimension contributed by contact `i`.
    pub fn contact_dim(&self, i: usize) -> usize {
        let c = &self.contacts[i];
        let f = if c.model.carries_force() {
            self.space.force_dim()
        } else {
            0
        };
        let t = if c.model.carries_torque() {
            self.space.torque_dim()
        } else {
            0
        };
        f + t
    }

    /// Offset of contact `i`'s block within the wrench stack.
    pub fn contact_offset(&self, i: usize) -> usize {
        (0..i).map(|j| self.contact_dim(j)).sum()
    }

    /// Total wrench-stack dimension.
    pub fn stack_dim(&self) -> usize {
        (0..self.len()).map(|i| self.contact_dim(i)).sum()
    }

    /// Application point embedded in 3-D (z = 0 for planar sets).
    pub fn r3(&self, i: usize) -> Vector3<f64> {
        let r = &self.contacts[i].r;
        match r.len() {
            2 => Vector3::new(r[0], r[1], 0.0),
            _ => Vector3::new(r[0], r[1], r[2]),
        }
    }

    /// Indices of force-carrying contacts (grasp columns and virtual-mass
    /// slots in contact order).
    pub fn force_contacts(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.contacts[i].model.carries_force())
            .collect()
    }

    /// Indices of torque-capable contacts.
    pub fn torque_contacts(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.contacts[i].model.carries_torque())
            .collect()
    }

    /// The grasp matrix mapping the wrench stack to the resultant wrench.
    pub fn grasp_matrix(&self) -> Matrix {
        let wd = self.space.wrench_dim();
        let fd = self.space.force_dim();
        let td = self.space.torque_dim();
        let mut g = Matrix::zeros(wd, self.stack_dim());
        for i in 0..self.len() {
            let mut col = self.contact_offset(i);
            let c = &self.contacts[i];
            if c.model.carries_force() {
                for k in 0..fd {
                    g[(k, col + k)] = 1.0;
                }
                match self.space {
                    WrenchSpace::Spatial => {
                        let s = skew(&self.r3(i));
                        for row in 0..3 {
                            for k in 0..3 {
                                g[(fd + row, col + k)] = s[(row, k)];
                            }
                        }
                    }
                    WrenchSpace::Planar => {
                        // moment row [-y, x]
                        g[(fd, col)] = -c.r[1];
                        g[(fd, col + 1)] = c.r[0];
                    }
                    _ => {}
                }
                col += fd;
            }
            if c.model.carries_torque() {
                for k in 0..td {
                    g[(fd + k, col + k)] = 1.0;
                }
            }
        }
        g
    }

    /// Resultant wrench `G h` of the stacked applied wrenches.
    pub fn resultant(&self, h: &Vector) -> Result<Wrench> {
        if h.len() != self.stack_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.stack_dim(),
                got: h.len(),
            });
        }
        Wrench::from_vector(self.space, &(self.grasp_matrix() * h))
    }

    /// Pairwise interaction residuals `(f_j - f_i) . (r_j - r_i)` in
    /// lexicographic pair order; force-only contact sets only.
    pub fn interaction_residuals(&self, f: &Vector) -> Result<Vec<f64>> {
        if !self
            .contacts
            .iter()
            .all(|c| c.model == ContactModel::ForceOnly)
        {
            return Err(Error::ModelMismatch);
        }
        let fd = self.space.force_dim();
        if f.len() != fd * self.len() {
            return Err(Error::DimensionMismatch {
                expected: fd * self.len(),
                got: f.len(),
            });
        }
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let fi = f.rows(fd * i, fd);
                let fj = f.rows(fd * j, fd);
                let df = fj - fi;
                let dr = &self.contacts[j].r - &self.contacts[i].r;
                out.push(df.dot(&dr));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(s: &[f64]) -> Vector {
        Vector::from_column_slice(s)
    }

    #[test]
    fn point_mass_grasp_is_identity_blocks() {
        let cs = ContactSet::new(
            WrenchSpace::Translational2,
            vec![
                Contact::force_only(v(&[0.0, 0.0])),
                Contact::force_only(v(&[0.0, 0.0])),
                Contact::force_only(v(&[0.0, 0.0])),
            ],
        )
        .unwrap();
        let g = cs.grasp_matrix();
        let expect = Matrix::from_row_slice(
            2,
            6,
            &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        );
        assert_eq!(g, expect);
    }

    #[test]
    fn single_rigid_contact_at_origin_is_identity() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![Contact::rigid(v(&[0.0, 0.0, 0.0]))],
        )
        .unwrap();
        assert_eq!(cs.grasp_matrix(), Matrix::identity(6, 6));
    }

    #[test]
    fn planar_moment_row() {
        let cs = ContactSet::new(
            WrenchSpace::Planar,
            vec![Contact::force_only(v(&[2.0, 1.0]))],
        )
        .unwrap();
        let g = cs.grasp_matrix();
        assert_eq!(g[(2, 0)], -1.0);
        assert_eq!(g[(2, 1)], 2.0);
    }

    #[test]
    fn torque_only_contact_block() {
        let cs = ContactSet::new(
            WrenchSpace::Planar,
            vec![
                Contact::force_only(v(&[1.0, 0.0])),
                Contact::torque_only(v(&[0.0, 0.0])),
            ],
        )
        .unwrap();
        assert_eq!(cs.stack_dim(), 3);
        let g = cs.grasp_matrix();
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(0, 2)], 0.0);
    }

    #[test]
    fn resultant_zero_stack() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::rigid(v(&[1.0, 0.0, 0.0])),
                Contact::rigid(v(&[0.0, 1.0, 0.0])),
            ],
        )
        .unwrap();
        let h = Vector::zeros(12);
        let w = cs.resultant(&h).unwrap();
        assert_eq!(w.norm(), 0.0);
    }

    #[test]
    fn equal_opposite_forces_cancel() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::force_only(v(&[1.0, 0.5, -0.2])),
                Contact::force_only(v(&[-1.0, -0.5, 0.2])),
            ],
        )
        .unwrap();
        // squeeze along the line joining the points
        let d = v(&[2.0, 1.0, -0.4]);
        let mut h = Vector::zeros(6);
        h.rows_mut(0, 3).copy_from(&d);
        h.rows_mut(3, 3).copy_from(&(-&d));
        let w = cs.resultant(&h).unwrap();
        assert_abs_diff_eq!(w.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn resultant_dimension_mismatch() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![Contact::rigid(v(&[0.0, 0.0, 0.0]))],
        )
        .unwrap();
        assert!(matches!(
            cs.resultant(&Vector::zeros(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interaction_residuals_equal_forces_vanish() {
        let cs = ContactSet::new(
            WrenchSpace::Translational3,
            vec![
                Contact::force_only(v(&[1.0, 0.0, 0.0])),
                Contact::force_only(v(&[0.0, 1.0, 0.0])),
                Contact::force_only(v(&[0.0, 0.0, 1.0])),
            ],
        )
        .unwrap();
        let f = v(&[0.3, 0.1, -0.2, 0.3, 0.1, -0.2, 0.3, 0.1, -0.2]);
        for r in cs.interaction_residuals(&f).unwrap() {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn interaction_residuals_antagonistic_pair() {
        // f1 = -f2 = k (r2 - r1) gives residual -2 k |r2 - r1|^2
        let r1 = v(&[0.0, 0.0, 0.0]);
        let r2 = v(&[1.0, 2.0, -1.0]);
        let k = 0.7;
        let cs = ContactSet::new(
            WrenchSpace::Translational3,
            vec![Contact::force_only(r1.clone()), Contact::force_only(r2.clone())],
        )
        .unwrap();
        let d = &r2 - &r1;
        let mut f = Vector::zeros(6);
        f.rows_mut(0, 3).copy_from(&(&d * k));
        f.rows_mut(3, 3).copy_from(&(&d * -k));
        let res = cs.interaction_residuals(&f).unwrap();
        assert_abs_diff_eq!(res[0], -2.0 * k * d.norm_squared(), epsilon = 1e-12);
    }

    #[test]
    fn interaction_residuals_reject_torque_contacts() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::rigid(v(&[0.0, 0.0, 0.0])),
                Contact::force_only(v(&[1.0, 0.0, 0.0])),
            ],
        )
        .unwrap();
        assert!(matches!(
            cs.interaction_residuals(&Vector::zeros(9)),
            Err(Error::ModelMismatch)
        ));
    }

    #[test]
    fn grasp_linearity() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::rigid(v(&[1.0, -0.3, 0.2])),
                Contact::rigid(v(&[-0.4, 0.8, 0.1])),
            ],
        )
        .unwrap();
        let h1 = Vector::from_fn(12, |i, _| (i as f64 * 0.37).sin());
        let h2 = Vector::from_fn(12, |i, _| (i as f64 * 0.71).cos());
        let lhs = cs.resultant(&(&h1 * 2.0 + &h2 * -3.0)).unwrap().as_vector();
        let rhs = cs.resultant(&h1).unwrap().as_vector() * 2.0
            + cs.resultant(&h2).unwrap().as_vector() * -3.0;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn rigid_grasp_full_rank_two_distinct_contacts() {
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            vec![
                Contact::rigid(v(&[1.0, 0.0, 0.0])),
                Contact::rigid(v(&[0.0, 1.0, 0.5])),
            ],
        )
        .unwrap();
        let g = cs.grasp_matrix();
        assert_eq!(crate::numerics::rank(&g, Default::default()), 6);
    }

    #[test]
    fn translational_reduction_matches_planar() {
        // coplanar z=0 spatial force-only contacts: dropping torque x,y rows
        // and the z force row gives the planar grasp matrix
        let pts = [[1.0, 0.5], [-0.7, 0.2], [0.1, -0.9]];
        let spatial = ContactSet::new(
            WrenchSpace::Spatial,
            pts.iter()
                .map(|p| Contact::force_only(v(&[p[0], p[1], 0.0])))
                .collect(),
        )
        .unwrap();
        let planar = ContactSet::new(
            WrenchSpace::Planar,
            pts.iter().map(|p| Contact::force_only(v(p))).collect(),
        )
        .unwrap();
        let gs = spatial.grasp_matrix();
        let gp = planar.grasp_matrix();
        // spatial rows {0,1,5} and columns {3i, 3i+1} correspond to the
        // planar projection
        for (pi, rows) in [0usize, 1, 5].iter().enumerate() {
            for i in 0..3 {
                for k in 0..2 {
                    assert_abs_diff_eq!(
                        gs[(*rows, 3 * i + k)],
                        gp[(pi, 2 * i + k)],
                        epsilon = 1e-14
                    );
                }
            }
        }
    }
}
