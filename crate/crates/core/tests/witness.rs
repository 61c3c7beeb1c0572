mod common;

use chainfold::gadgets::FrameVariant;
use chainfold::model::TurnSequence;
use chainfold::reduction::{
    audit, extract_assignment, extract_full_assignment, make_witness, random_instance, reduce, verify_artifact,
    CompileOptions, ReductionError, SIZE_CONSTANT,
};
use rand::Rng;

fn four_clause(variant: FrameVariant) -> chainfold::reduction::ReductionArtifact {
    let inst = common::corpus().into_iter().find(|i| i.name == "four_clause").unwrap();
    reduce(&inst.formula, &inst.drawing, CompileOptions { variant, toy: false }).unwrap()
}

fn flip(t: &TurnSequence, i: usize) -> TurnSequence {
    let mut v = t.turns().to_vec();
    v[i] = v[i].flipped();
    TurnSequence(v)
}

#[test]
fn one_flipped_turn_fails_verification() {
    let mut rng = common::rng(20);
    for variant in [FrameVariant::Closed, FrameVariant::Hp, FrameVariant::Square] {
        let art = four_clause(variant);
        let w = make_witness(&art, &[true, false, true, true]).unwrap();
        assert!(verify_artifact(&art, &w).passed());
        for _ in 0..40 {
            let i = rng.gen_range(0..w.len());
            let bad = flip(&w, i);
            assert!(!verify_artifact(&art, &bad).passed(), "{variant:?}: flipping turn {i} still verifies");
        }
    }
}

#[test]
fn extraction_rejects_an_invalid_folding() {
    let art = four_clause(FrameVariant::Closed);
    let w = make_witness(&art, &[true, false, true, true]).unwrap();
    let bad = flip(&w, w.len() / 2);
    assert!(matches!(extract_full_assignment(&art, &bad), Err(ReductionError::InvalidFolding(_))));
    assert!(extract_assignment(&art, &bad).is_err());
    assert!(extract_assignment(&art, &TurnSequence::default()).is_err());
}

#[test]
fn wrong_assignment_length_is_an_error() {
    let art = four_clause(FrameVariant::Hp);
    assert!(make_witness(&art, &[true, false]).is_err());
}

#[test]
fn size_ratio_stays_under_the_constant() {
    let mut worst = 0.0f64;
    for seed in 0..12 {
        let n = 1 + seed as usize % 8;
        let m = (n + 2) / 3 + seed as usize % 4;
        let (f, d) = random_instance(seed, n, m);
        let art = reduce(&f, &d, CompileOptions { variant: FrameVariant::Closed, toy: false }).unwrap();
        assert!(audit(&art).passed(), "seed {seed}");
        let lay = &art.blueprint.layout.formula;
        let nm = (lay.num_vars + lay.num_clauses()) as f64;
        worst = worst.max(art.blueprint.inner_length as f64 / nm.powi(3));
    }
    assert!(worst <= SIZE_CONSTANT as f64, "L/N^3 reached {worst}");
}
