//! Parser round-trip properties over randomly generated expression trees.

use slicebox::rng::RngStream;
use slicebox::targets::parse_density;
use slicebox::testing::{eval_agrees, random_ast};

#[test]
fn print_parse_equivalence_over_random_asts() {
    let mut rng = RngStream::new(2025);
    for i in 0..1000 {
        let ast = random_ast(&mut rng, 6);
        let printed = ast.to_string();
        let reparsed = parse_density(&printed)
            .unwrap_or_else(|e| panic!("case {i}: `{printed}` failed to reparse: {e}"));
        for _ in 0..20 {
            let x = rng.uniform(-10.0, 10.0).unwrap();
            assert!(
                eval_agrees(&ast, &reparsed, x),
                "case {i}: `{printed}` disagrees at x = {x}: {} vs {}",
                ast.eval(x),
                reparsed.eval(x)
            );
        }
    }
}

#[test]
fn printing_is_a_fixed_point_over_random_asts() {
    let mut rng = RngStream::new(2026);
    for i in 0..1000 {
        let ast = random_ast(&mut rng, 5);
        let once = ast.to_string();
        let twice = parse_density(&once)
            .unwrap_or_else(|e| panic!("case {i}: `{once}`: {e}"))
            .to_string();
        assert_eq!(once, twice, "case {i}");
    }
}

#[test]
fn folding_preserves_evaluation_over_random_asts() {
    let mut rng = RngStream::new(2027);
    for i in 0..1000 {
        let ast = random_ast(&mut rng, 5);
        let folded = ast.fold();
        for _ in 0..10 {
            let x = rng.uniform(-10.0, 10.0).unwrap();
            assert!(
                eval_agrees(&ast, &folded, x),
                "case {i}: `{ast}` vs folded `{folded}` at x = {x}"
            );
        }
    }
}
