use serde::{Deserialize, Serialize};

/// State of one two-action Tsetlin automaton.
///
/// With `N` states per action the state lives in `[1, 2N]`; states `1..=N`
/// select *exclude* and `N+1..=2N` select *include*. Steps saturate at both
/// ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(transparent)]
pub struct TaState(u16);

impl TaState {
    /// Returns `None` when `state` lies outside `[1, 2N]`.
    pub fn new(state: u16, states_per_action: u16) -> Option<Self> {
        (state >= 1 && u32::from(state) <= 2 * u32::from(states_per_action)).then_some(Self(state))
    }

    /// The weakest exclude state, `N`.
    #[inline]
    pub fn boundary(states_per_action: u16) -> Self {
        Self(states_per_action)
    }

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn includes(self, states_per_action: u16) -> bool {
        self.0 > states_per_action
    }

    /// One step toward include, saturating at `2N`.
    #[inline]
    pub fn toward_include(self, states_per_action: u16) -> Self {
        if u32::from(self.0) < 2 * u32::from(states_per_action) {
            Self(self.0 + 1)
        } else {
            self
        }
    }

    /// One step toward exclude, saturating at `1`.
    #[inline]
    pub fn toward_exclude(self) -> Self {
        Self(self.0.saturating_sub(1).max(1))
    }
}
