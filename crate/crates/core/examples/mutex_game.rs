//! Prints the mutual-exclusion synthesis game in the input file format.
//!
//! Pass condition numbers (1 to 8) to restrict the first choice, for
//! instance `cargo run --example mutex_game -- 8`.

use alpaga_core::testkit::mutex_game;

fn main() {
    let mut choices: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("choices are numbers 1..=8")).collect();
    if choices.is_empty() {
        choices = (1..=8).collect();
    }
    print!("{}", mutex_game(&choices).render());
}
