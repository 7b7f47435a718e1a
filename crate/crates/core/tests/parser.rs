use mdp_reach::generate::{mutate_model_text, random_mdp, RandomSpec};
use mdp_reach::io::{parse_model, serialize_model};
use mdp_reach::model::validate_mdp;
use mdp_reach::models;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let m = random_mdp(&mut ChaCha8Rng::seed_from_u64(seed), &RandomSpec::new(8, 3));
        let text = serialize_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn mutations_are_rejected_with_a_line_or_valid(seed in any::<u64>(), which in 0usize..5) {
        let (_, text) = models::texts()[which];
        let mutated = mutate_model_text(&mut ChaCha8Rng::seed_from_u64(seed), text);
        match parse_model(&mutated) {
            Ok(m) => prop_assert!(validate_mdp(&m).is_ok()),
            Err(e) => {
                prop_assert!(e.line >= 1);
                prop_assert!(e.line <= mutated.lines().count().max(1));
            }
        }
    }
}

#[test]
fn bundled_files_parse_and_validate() {
    for (name, text) in models::texts() {
        let m = parse_model(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(validate_mdp(&m).is_ok(), "{name}");
    }
}

#[test]
fn error_lines_point_at_the_fault() {
    let e = parse_model("mdp 2\ninitial 0\n\naction 0 a\nto 3 1.0\naction 1 b\nto 1 1.0\n").unwrap_err();
    assert_eq!(e.line, 5);
    let e = parse_model("# nothing\n").unwrap_err();
    assert_eq!(e.line, 1);
}
