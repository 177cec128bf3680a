//! Small reference networks used by tests, the acceptance suite and the CLI docs.

use crate::net::{Network, Transition};
use crate::scalar::Real;

fn names(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

/// Catalysed conversion `A -> 2 B` with catalyst `C`; species `A, B, C, AC`.
///
/// Transitions in order: `0 -> A`, `B -> 0`, `A + C -> AC`, `AC -> 2 B + C`.
pub fn catalyst<T: Real>(rates: [T; 4]) -> Network<T> {
    Network::new(
        names(&["A", "B", "C", "AC"]),
        vec![
            Transition::new(vec![0, 0, 0, 0], vec![1, 0, 0, 0], rates[0]),
            Transition::new(vec![0, 1, 0, 0], vec![0, 0, 0, 0], rates[1]),
            Transition::new(vec![1, 0, 1, 0], vec![0, 0, 0, 1], rates[2]),
            Transition::new(vec![0, 0, 0, 1], vec![0, 2, 1, 0], rates[3]),
        ],
    )
    .expect("valid fixture")
}

/// Diatomic gas: `X1 -> 2 X2` at `split`, `2 X2 -> X1` at `bind`.
pub fn diatomic<T: Real>(split: T, bind: T) -> Network<T> {
    Network::new(
        names(&["X1", "X2"]),
        vec![Transition::new(vec![1, 0], vec![0, 2], split), Transition::new(vec![0, 2], vec![1, 0], bind)],
    )
    .expect("valid fixture")
}

/// Birth-death: `0 -> A` at `birth`, `A -> 0` at `death`.
pub fn birth_death<T: Real>(birth: T, death: T) -> Network<T> {
    Network::new(
        names(&["A"]),
        vec![Transition::new(vec![0], vec![1], birth), Transition::new(vec![1], vec![0], death)],
    )
    .expect("valid fixture")
}

/// Pure decay `A -> 0`.
pub fn decay<T: Real>(rate: T) -> Network<T> {
    Network::new(names(&["A"]), vec![Transition::new(vec![1], vec![0], rate)]).expect("valid fixture")
}
