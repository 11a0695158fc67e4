#![allow(dead_code)]

use crawford_core::{Field, Operator, SpaceDescriptor};
use num_complex::Complex64 as C64;
use rand::Rng;

pub const PS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

pub fn space(dim: usize, field: Field, p: f64) -> SpaceDescriptor {
    SpaceDescriptor::lp(dim, field, p).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize, field: Field) -> Vec<Vec<C64>> {
    (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| match field {
                    Field::Real => C64::new(rng.gen_range(-1.0..1.0), 0.0),
                    Field::Complex => C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                })
                .collect()
        })
        .collect()
}

pub fn random_operator<R: Rng>(rng: &mut R, space: &SpaceDescriptor) -> Operator {
    Operator::from_rows(space.clone(), &random_matrix(rng, space.dim(), space.field())).unwrap()
}

/// Instance `i` of the mixed population: dims {2, 3}, all five exponents,
/// real and complex fields.
pub fn population_space(i: usize) -> SpaceDescriptor {
    let dim = 2 + i % 2;
    let p = PS[(i / 2) % PS.len()];
    let field = if (i / 10) % 2 == 1 { Field::Complex } else { Field::Real };
    space(dim, field, p)
}
