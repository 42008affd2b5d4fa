//! Path-completeness: does a candidate automaton realize every finite
//! label word the language automaton realizes? The check runs a powerset
//! determinization of the candidate against the language and reconstructs
//! a shortest counterexample word on failure.
//!
//! Run with: cargo run --example path_completeness

use domcert::automata::{fixtures, path_complete_check, PathCompleteness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let no_ones = fixtures::no_consecutive_ones();
    let alternation = fixtures::strict_alternation();

    // every strict alternation avoids consecutive 1's ...
    match path_complete_check(&alternation, &no_ones)? {
        PathCompleteness::Complete => println!("alternation words fit the no-11 automaton"),
        PathCompleteness::Counterexample(w) => println!("unexpected counterexample {w:?}"),
    }

    // ... but not conversely: "2 2" avoids consecutive 1's yet no strict
    // alternation contains it
    match path_complete_check(&no_ones, &alternation)? {
        PathCompleteness::Complete => println!("unexpectedly complete"),
        PathCompleteness::Counterexample(w) => {
            println!("no-11 word not realizable under strict alternation: {w:?}")
        }
    }
    Ok(())
}
