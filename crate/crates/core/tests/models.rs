mod common;

use common::*;
use gdf_core::models::{
    accompanying_sequence, danielewski_model, surface_equations, tree_from_sequence,
    verify_fiber_structure, AccompanyingSequence, SurfaceModel,
};
use gdf_core::poly::RatPoly;
use gdf_core::rational::int;
use gdf_core::tree::{bush_of_type, tree_iso, TreeType};
use gdf_core::Rat;
use rand::Rng;

fn random_bush(r: &mut Rng8) -> gdf_core::tree::RootedTree {
    let h = r.gen_range(1..=4);
    let mut counts = vec![0; h + 1];
    for _ in 0..r.gen_range(1..=5) {
        counts[r.gen_range(1..=h)] += 1;
    }
    counts[h] += 1;
    bush_of_type(&TreeType::new(counts).unwrap()).unwrap()
}

#[test]
fn random_bushes_round_trip_through_sequences() {
    let mut r = rng(11);
    for _ in 0..200 {
        let t = random_bush(&mut r);
        let nb = t.children(t.root()).len();
        let mut roots: Vec<Rat> = Vec::new();
        while roots.len() < nb {
            let x = small_rat(&mut r);
            if !roots.contains(&x) {
                roots.push(x);
            }
        }
        let seq = accompanying_sequence(&t, Some(&roots)).unwrap();
        assert!(verify_fiber_structure(&seq).all_passed());
        assert!(tree_iso(&tree_from_sequence(&seq).unwrap(), &t).is_some());
        let back = AccompanyingSequence::from_json(&seq.to_json()).unwrap();
        assert_eq!(back.to_json(), seq.to_json());
        let model = surface_equations(&seq, None).unwrap();
        assert_eq!(model.equations.len(), seq.m);
        assert_eq!(SurfaceModel::from_json(&model.to_json()).unwrap(), model);
    }
}

#[test]
fn special_fiber_points_lie_on_the_model() {
    // over z = 0 every chart coordinate is free on the component of the
    // branch of α once u = α and the earlier t_i vanish as required
    let t = gdf_core::tree::RootedTree::from_nested("[[[[]]],[[[]]],[[]],[],[]]").unwrap();
    let seq = accompanying_sequence(&t, None).unwrap();
    let model = surface_equations(&seq, None).unwrap();
    let vars = model.vars.clone();
    assert_eq!(vars[0], "z");
    for a in 0..5 {
        let mut pt = vec![int(0); vars.len()];
        pt[1] = int(a);
        let vals = model.evaluate(&pt).unwrap();
        assert!(vals.iter().all(num::Zero::is_zero), "alpha = {a}");
    }
    // a generic point of the fiber z = 1 solves t_1 = p_1(u)
    let u = int(7);
    let mut pt = vec![int(1), u.clone()];
    let mut prev = seq.p(1).evaluate(&u);
    pt.push(prev.clone());
    for i in 2..=seq.m {
        prev = &prev * seq.r(i).evaluate(&u);
        pt.push(prev.clone());
    }
    assert!(model.evaluate(&pt).unwrap().iter().all(num::Zero::is_zero));
}

#[test]
fn danielewski_surface_has_a_uniform_bush() {
    let p = RatPoly::from_roots(&[int(0), int(1), int(5)], "u");
    let (model, bush) = danielewski_model(3, &p).unwrap();
    assert_eq!(bush.tree_type().to_string(), "(0,0,0,3)");
    assert_eq!(model.equations.len(), 1);
    assert_eq!(model.text[0], "z^3*t - (u^3 - 6u^2 + 5u)");
}
