#![allow(dead_code)]

use flexsky::{
    Attribute, AttributeSchema, LinearConstraint, Relation, Scalar, ScoringFamily, Sense,
    Transform, Tuple, WeightPolytope,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mix {
    Identity,
    Monotone,
    WithPeak,
}

pub struct Instance<T> {
    pub relation: Relation<T>,
    pub family: ScoringFamily<T>,
}

fn pick_transform<T: Scalar>(rng: &mut ChaCha8Rng, mix: Mix) -> (Attribute, Transform<T>) {
    let k = T::lit(rng.gen_range(1.0..40.0));
    let choice = match mix {
        Mix::Identity => 0,
        Mix::Monotone => rng.gen_range(0..5),
        Mix::WithPeak => rng.gen_range(0..6),
    };
    match choice {
        0 => (Attribute::normalized("x"), Transform::Identity),
        1 => (Attribute::normalized("x"), Transform::Power(T::lit(rng.gen_range(1.0..3.0)))),
        2 => (Attribute::normalized("x"), Transform::Complement),
        3 => (Attribute::rate("x"), Transform::PoissonCdf(k)),
        4 => (Attribute::rate("x"), Transform::PoissonSurvival(k)),
        _ => (Attribute::rate("x"), Transform::Peak(k)),
    }
}

/// Random chain `w_a <= w_b <= ...` over a shuffled subset, plus sometimes a
/// floor on one weight. The uniform weight vector always satisfies it.
pub fn random_constraints<T: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> Vec<LinearConstraint<T>> {
    if d < 2 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let len = rng.gen_range(2..=d);
    let mut out: Vec<LinearConstraint<T>> = order[..len]
        .windows(2)
        .map(|p| LinearConstraint::ordered(d, p[0], p[1]))
        .collect();
    if rng.gen_bool(0.5) {
        let mut c = vec![T::zero(); d];
        c[rng.gen_range(0..d)] = T::one();
        out.push(LinearConstraint::new(c, Sense::Ge, T::lit(0.5 / d as f64)));
    }
    out
}

pub fn random_instance<T: Scalar>(
    seed: u64,
    n: usize,
    d: usize,
    mix: Mix,
    constrained: bool,
) -> Instance<T> {
    build(seed, n, d, mix, constrained, None)
}

/// Like [`random_instance`], but every pair of tuples differs by more than
/// `margin` in each transformed coordinate and at each vertex.
pub fn robust_instance<T: Scalar>(
    seed: u64,
    n: usize,
    d: usize,
    mix: Mix,
    constrained: bool,
    margin: f64,
) -> Instance<T> {
    build(seed, n, d, mix, constrained, Some(T::lit(margin)))
}

fn build<T: Scalar>(
    seed: u64,
    n: usize,
    d: usize,
    mix: Mix,
    constrained: bool,
    margin: Option<T>,
) -> Instance<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attributes = Vec::with_capacity(d);
    let mut transforms = Vec::with_capacity(d);
    for i in 0..d {
        let (mut a, t) = pick_transform::<T>(&mut rng, mix);
        a.name = format!("a{i}");
        attributes.push(a);
        transforms.push(t);
    }
    let schema = AttributeSchema::new(attributes).unwrap();
    let constraints = if constrained {
        random_constraints(&mut rng, d)
    } else {
        Vec::new()
    };
    let polytope = WeightPolytope::new(d, constraints).unwrap();
    let family = ScoringFamily::new(schema.clone(), transforms, polytope).unwrap();
    let numerics = flexsky::NumericsConfig::default();
    let mut kept: Vec<(Vec<T>, Vec<T>)> = Vec::with_capacity(n);
    let mut tuples = Vec::with_capacity(n);
    let mut attempts = 0;
    while tuples.len() < n {
        attempts += 1;
        assert!(attempts < 1000 * (n + 1), "could not place {n} separated tuples");
        let values: Vec<T> = schema
            .attributes()
            .iter()
            .map(|a| match a.kind {
                flexsky::AttributeKind::Normalized => T::lit(rng.gen_range(0.0..=1.0)),
                flexsky::AttributeKind::Rate => T::lit(rng.gen_range(1.0..50.0)),
            })
            .collect();
        let tuple = Tuple::new(format!("t{:03}", tuples.len()), values);
        if let Some(m) = margin {
            let g = family.transform_tuple(&tuple, &numerics).unwrap();
            let s: Vec<T> = family
                .polytope()
                .vertices()
                .iter()
                .map(|w| w.iter().zip(&g).map(|(&a, &b)| a * b).sum())
                .collect();
            let apart = |a: &[T], b: &[T]| a.iter().zip(b).all(|(&x, &y)| (x - y).abs() > m);
            if !kept.iter().all(|(g2, s2)| apart(&g, g2) && apart(&s, s2)) {
                continue;
            }
            kept.push((g, s));
        }
        tuples.push(tuple);
    }
    let relation = Relation::from_tuples(schema, tuples).unwrap();
    Instance { relation, family }
}
