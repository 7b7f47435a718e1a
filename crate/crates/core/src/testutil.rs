//! Proptest strategies built on the seeded generators.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::generate::{random_chain, random_mdp, RandomSpec};
use crate::model::{MarkovChain, Mdp};

pub fn arb_mdp(max_states: usize, max_actions: usize) -> impl Strategy<Value = Mdp> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_mdp(&mut rng, &RandomSpec::new(max_states, max_actions))
    })
}

pub fn arb_chain(max_states: usize) -> impl Strategy<Value = MarkovChain> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_chain(&mut rng, &RandomSpec::new(max_states, 1))
    })
}
