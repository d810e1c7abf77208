//! Shared helpers for the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use wrenchdist::equivalence::{assign_torque_share, TorqueShare, VirtualEquivalence};
use wrenchdist::{Contact, ContactSet, Vector, Wrench, WrenchSpace};

/// Embedded reference tables for the three case studies.
pub fn tables() -> Value {
    serde_json::from_str(include_str!("../../fixtures/reference_tables.json"))
        .expect("embedded tables parse")
}

pub fn table_vec(v: &Value) -> Vector {
    Vector::from_vec(
        v.as_array()
            .expect("array")
            .iter()
            .map(|x| x.as_f64().expect("number"))
            .collect(),
    )
}

/// Flatten a list of per-contact vectors into one stacked vector.
pub fn table_flat(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .flat_map(|row| {
            row.as_array()
                .expect("nested array")
                .iter()
                .map(|x| x.as_f64().expect("number"))
        })
        .collect()
}

pub fn sphere_points() -> Vec<Vector> {
    tables()["sphere"]["points"]
        .as_array()
        .expect("points")
        .iter()
        .map(table_vec)
        .collect()
}

pub fn sphere_rigid() -> ContactSet {
    ContactSet::new(
        WrenchSpace::Spatial,
        sphere_points().into_iter().map(Contact::rigid).collect(),
    )
    .expect("valid contact set")
}

pub fn sphere_force_only() -> ContactSet {
    ContactSet::new(
        WrenchSpace::Spatial,
        sphere_points()
            .into_iter()
            .map(Contact::force_only)
            .collect(),
    )
    .expect("valid contact set")
}

/// The four applied wrenches of the sphere study, stacked.
pub fn sphere_applied() -> Vector {
    let t = tables();
    let mut h = Vector::zeros(24);
    for (i, row) in t["sphere"]["applied"]
        .as_array()
        .expect("applied")
        .iter()
        .enumerate()
    {
        h.rows_mut(6 * i, 6).copy_from(&table_vec(row));
    }
    h
}

pub fn triangle_contacts() -> ContactSet {
    let t = tables();
    let mut contacts: Vec<Contact> = t["triangle"]["points"]
        .as_array()
        .expect("points")
        .iter()
        .map(|p| Contact::force_only(table_vec(p)))
        .collect();
    contacts.push(Contact::torque_only(Vector::zeros(2)));
    ContactSet::new(WrenchSpace::Planar, contacts).expect("valid contact set")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spatial rigid contact set with a feasible mass assignment:
/// masses are drawn first and the points shifted so the weighted centroid
/// sits at the origin.
pub fn random_rigid_problem(
    rng: &mut ChaCha8Rng,
    n: usize,
    beta: f64,
) -> (ContactSet, VirtualEquivalence) {
    let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    let total: f64 = masses.iter().sum();
    let cs = loop {
        let mut points: Vec<Vector> =
            (0..n).map(|_| Vector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let mut centroid = Vector::zeros(3);
        for (m, p) in masses.iter().zip(&points) {
            centroid += p * *m;
        }
        centroid /= total;
        for p in &mut points {
            *p -= &centroid;
        }
        let cs = ContactSet::new(
            WrenchSpace::Spatial,
            points.into_iter().map(Contact::rigid).collect(),
        )
        .expect("valid contact set");
        // reject near-collinear layouts: their induced inertia is nearly
        // singular and the dynamics comparison loses accuracy
        let j_f = wrenchdist::equivalence::induced_inertia(&cs, &Vector::from_vec(masses.clone()))
            .expect("spatial set")
            .expect("spatial set has induced inertia");
        let min_eig = match j_f {
            wrenchdist::equivalence::Inertia::Spatial(m) => nalgebra::linalg::SymmetricEigen::new(m)
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &e| a.min(e)),
            wrenchdist::equivalence::Inertia::Planar(j) => j,
        };
        if min_eig > 0.2 {
            break cs;
        }
    };
    let share = if beta == 0.0 {
        TorqueShare::forces_only()
    } else {
        TorqueShare::uniform(beta, n)
    };
    let ve = assign_torque_share(&cs, &Vector::from_vec(masses), &share)
        .expect("feasible by construction");
    (cs, ve)
}

/// Random symmetric (zero-sum) spatial rigid contact set of even size.
pub fn random_symmetric_rigid(rng: &mut ChaCha8Rng, pairs: usize) -> ContactSet {
    let mut points = Vec::new();
    for _ in 0..pairs {
        let p = Vector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        points.push(p.clone());
        points.push(-p);
    }
    ContactSet::new(
        WrenchSpace::Spatial,
        points.into_iter().map(Contact::rigid).collect(),
    )
    .expect("valid contact set")
}

pub fn random_wrench(rng: &mut ChaCha8Rng, space: WrenchSpace) -> Wrench {
    Wrench {
        force: Vector::from_fn(space.force_dim(), |_, _| rng.gen_range(-1.0..1.0)),
        torque: Vector::from_fn(space.torque_dim(), |_, _| rng.gen_range(-1.0..1.0)),
    }
}

pub fn random_stack(rng: &mut ChaCha8Rng, cs: &ContactSet) -> Vector {
    Vector::from_fn(cs.stack_dim(), |_, _| rng.gen_range(-1.0..1.0))
}

pub fn max_abs_diff(got: &Vector, want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch");
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max)
}
