//! Small reference models bundled with the crate. The text files under
//! `models/` are the source of truth; the constants name their IDs.

use crate::io::parse_model;
use crate::model::Mdp;

pub const FIG1_TEXT: &str = include_str!("../models/fig1.mdp");
pub const FIG2_TEXT: &str = include_str!("../models/fig2.mdp");
pub const FIG3_TEXT: &str = include_str!("../models/fig3.mdp");
pub const FIG4_TEXT: &str = include_str!("../models/fig4.mdp");
pub const COIN_TEXT: &str = include_str!("../models/coin.mdp");

/// Loop between two states with an exit gamble.
pub fn fig1() -> Mdp {
    parse_model(FIG1_TEXT).expect("bundled model")
}

/// A single decision state where the optimistic choice is a trap.
pub fn fig2() -> Mdp {
    parse_model(FIG2_TEXT).expect("bundled model")
}

/// Two states that can bounce forever, with a fair exit.
pub fn fig3() -> Mdp {
    parse_model(FIG3_TEXT).expect("bundled model")
}

/// Two 2-state loops, one of them containing the goal.
pub fn fig4() -> Mdp {
    parse_model(FIG4_TEXT).expect("bundled model")
}

/// One fair coin between goal and sink.
pub fn coin() -> Mdp {
    parse_model(COIN_TEXT).expect("bundled model")
}

pub fn all() -> Vec<Mdp> {
    vec![fig1(), fig2(), fig3(), fig4(), coin()]
}

/// Every bundled model text with its file name.
pub fn texts() -> [(&'static str, &'static str); 5] {
    [
        ("fig1.mdp", FIG1_TEXT),
        ("fig2.mdp", FIG2_TEXT),
        ("fig3.mdp", FIG3_TEXT),
        ("fig4.mdp", FIG4_TEXT),
        ("coin.mdp", COIN_TEXT),
    ]
}

pub mod fig1 {
    use crate::model::{ActionId, StateId};
    pub const S_HAT: StateId = StateId(0);
    pub const S1: StateId = StateId(1);
    pub const S2: StateId = StateId(2);
    pub const S_PLUS: StateId = StateId(3);
    pub const S_MINUS: StateId = StateId(4);
    pub const A: ActionId = ActionId(0);
    pub const A1: ActionId = ActionId(1);
    pub const B1: ActionId = ActionId(2);
    pub const A2: ActionId = ActionId(3);
    pub const B2: ActionId = ActionId(4);
    pub const A_PLUS: ActionId = ActionId(5);
    pub const A_MINUS: ActionId = ActionId(6);
}

pub mod fig2 {
    use crate::model::{ActionId, StateId};
    pub const S_HAT: StateId = StateId(0);
    pub const S_PLUS: StateId = StateId(1);
    pub const S_MINUS: StateId = StateId(2);
    pub const A1: ActionId = ActionId(0);
    pub const B1: ActionId = ActionId(1);
    pub const A_PLUS: ActionId = ActionId(2);
    pub const A_MINUS: ActionId = ActionId(3);
}

pub mod fig3 {
    use crate::model::{ActionId, StateId};
    pub const S_HAT: StateId = StateId(0);
    pub const S1: StateId = StateId(1);
    pub const S_PLUS: StateId = StateId(2);
    pub const S_MINUS: StateId = StateId(3);
    pub const A0: ActionId = ActionId(0);
    pub const A1: ActionId = ActionId(1);
    pub const B1: ActionId = ActionId(2);
    pub const A_PLUS: ActionId = ActionId(3);
    pub const A_MINUS: ActionId = ActionId(4);
}

pub mod fig4 {
    use crate::model::{ActionId, StateId};
    pub const S_HAT: StateId = StateId(0);
    pub const S1: StateId = StateId(1);
    pub const S2: StateId = StateId(2);
    pub const S3: StateId = StateId(3);
    pub const A0: ActionId = ActionId(0);
    pub const B0: ActionId = ActionId(1);
    pub const A1: ActionId = ActionId(2);
    pub const A2: ActionId = ActionId(3);
    pub const A3: ActionId = ActionId(4);
    pub const B1: ActionId = ActionId(5);
}

pub mod coin {
    use crate::model::{ActionId, StateId};
    pub const S_HAT: StateId = StateId(0);
    pub const S_PLUS: StateId = StateId(1);
    pub const S_MINUS: StateId = StateId(2);
    pub const FLIP: ActionId = ActionId(0);
}
