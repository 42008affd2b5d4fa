//! Constraint automata over the mode alphabet: validation, trimming to the
//! bi-infinite core, path-completeness by factor-language inclusion,
//! admissible-signal generation, and elementary-cycle enumeration.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A labeled transition `from --label--> to`. Labels are mode indices in
/// `1..=alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: String,
    pub label: usize,
    pub to: String,
}

impl Transition {
    pub fn new(from: &str, label: usize, to: &str) -> Self {
        Transition { from: from.into(), label, to: to.into() }
    }
}

impl std::fmt::Display for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -{}-> {}", self.from, self.label, self.to)
    }
}

/// Finite-state automaton (Q, Sigma, delta). States are arbitrary strings,
/// kept in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Automaton {
    states: Vec<String>,
    alphabet_size: usize,
    transitions: Vec<Transition>,
}

impl Automaton {
    pub fn new(
        states: Vec<String>,
        alphabet_size: usize,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("automaton needs at least one state".into()));
        }
        if alphabet_size == 0 {
            return Err(Error::InvalidInput("alphabet must be nonempty".into()));
        }
        let mut states = states;
        states.sort();
        states.dedup();
        let declared: HashSet<&String> = states.iter().collect();
        let mut seen = HashSet::new();
        for t in &transitions {
            if !declared.contains(&t.from) || !declared.contains(&t.to) {
                return Err(Error::InvalidInput(format!(
                    "transition {t} references an undeclared state"
                )));
            }
            if t.label == 0 || t.label > alphabet_size {
                return Err(Error::InvalidInput(format!(
                    "transition {t} has label outside 1..={alphabet_size}"
                )));
            }
            if !seen.insert(t.clone()) {
                return Err(Error::InvalidInput(format!("duplicate transition {t}")));
            }
        }
        let mut transitions = transitions;
        transitions.sort();
        Ok(Automaton { states, alphabet_size, transitions })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn state_index(&self, name: &str) -> usize {
        self.states.binary_search_by(|s| s.as_str().cmp(name)).unwrap()
    }

    fn outgoing(&self, state: &str) -> Vec<&Transition> {
        self.transitions.iter().filter(|t| t.from == state).collect()
    }

    /// Restrict to the maximal sub-automaton in which every state has both a
    /// predecessor and a successor, so every remaining state lies on some
    /// bi-infinite path.
    pub fn trim_core(&self) -> Result<Automaton> {
        let mut alive: HashSet<String> = self.states.iter().cloned().collect();
        loop {
            let mut has_in: HashSet<&String> = HashSet::new();
            let mut has_out: HashSet<&String> = HashSet::new();
            for t in &self.transitions {
                if alive.contains(&t.from) && alive.contains(&t.to) {
                    has_out.insert(&t.from);
                    has_in.insert(&t.to);
                }
            }
            let dead: Vec<String> = alive
                .iter()
                .filter(|s| !has_in.contains(s) || !has_out.contains(s))
                .cloned()
                .collect();
            if dead.is_empty() {
                break;
            }
            for s in dead {
                alive.remove(&s);
            }
        }
        if alive.is_empty() {
            return Err(Error::EmptyLanguage);
        }
        let states: Vec<String> = alive.iter().cloned().collect();
        let transitions: Vec<Transition> = self
            .transitions
            .iter()
            .filter(|t| alive.contains(&t.from) && alive.contains(&t.to))
            .cloned()
            .collect();
        Automaton::new(states, self.alphabet_size, transitions)
    }

    /// States removed by `trim_core`, i.e. states that violate the
    /// every-node-inside-or-between-loops structural assumption.
    pub fn non_core_states(&self) -> Vec<String> {
        match self.trim_core() {
            Ok(core) => {
                let alive: HashSet<&String> = core.states.iter().collect();
                self.states.iter().filter(|s| !alive.contains(s)).cloned().collect()
            }
            Err(_) => self.states.clone(),
        }
    }

    /// Check that `labels` is a factor of the automaton's path language,
    /// by forward state-set simulation. Returns the surviving state set.
    pub fn admissible(&self, labels: &[usize]) -> Result<HashSet<String>> {
        let mut current: HashSet<String> = self.states.iter().cloned().collect();
        for (pos, &label) in labels.iter().enumerate() {
            let next: HashSet<String> = self
                .transitions
                .iter()
                .filter(|t| t.label == label && current.contains(&t.from))
                .map(|t| t.to.clone())
                .collect();
            if next.is_empty() {
                return Err(Error::Inadmissible { position: pos });
            }
            current = next;
        }
        Ok(current)
    }

    /// Uniformly random admissible walk of the given length, reproducible
    /// from `seed`. Requires the automaton to be trimmed (every state must
    /// have a successor). Returns the label sequence and the witness state
    /// path (length + 1 states).
    pub fn generate_signal(
        &self,
        length: usize,
        seed: u64,
    ) -> Result<(SwitchingSignal, Vec<String>)> {
        if length == 0 {
            return Err(Error::InvalidInput("signal length must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = self.states[rng.gen_range(0..self.states.len())].clone();
        let mut labels = Vec::with_capacity(length);
        let mut path = vec![state.clone()];
        for _ in 0..length {
            let outs = self.outgoing(&state);
            if outs.is_empty() {
                return Err(Error::EmptyLanguage);
            }
            let t = outs[rng.gen_range(0..outs.len())];
            labels.push(t.label);
            state = t.to.clone();
            path.push(state.clone());
        }
        Ok((SwitchingSignal::finite(labels)?, path))
    }
}

/// Finite or periodic switching signal. A periodic signal stands for the
/// bi-infinite repetition of its label block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingSignal {
    labels: Vec<usize>,
    kind: SignalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Finite,
    Periodic,
}

impl SwitchingSignal {
    pub fn finite(labels: Vec<usize>) -> Result<Self> {
        Self::new(labels, SignalKind::Finite)
    }

    pub fn periodic(labels: Vec<usize>) -> Result<Self> {
        Self::new(labels, SignalKind::Periodic)
    }

    fn new(labels: Vec<usize>, kind: SignalKind) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("signal must be nonempty".into()));
        }
        if labels.iter().any(|&l| l == 0) {
            return Err(Error::InvalidInput("labels start at 1".into()));
        }
        Ok(SwitchingSignal { labels, kind })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn period(&self) -> Option<usize> {
        match self.kind {
            SignalKind::Periodic => Some(self.labels.len()),
            SignalKind::Finite => None,
        }
    }

    /// Label at step `t`; periodic signals wrap, finite signals are only
    /// defined up to their length.
    pub fn label_at(&self, t: usize) -> Option<usize> {
        match self.kind {
            SignalKind::Periodic => Some(self.labels[t % self.labels.len()]),
            SignalKind::Finite => self.labels.get(t).copied(),
        }
    }

    /// First `steps` labels, unrolling periodic signals.
    pub fn unroll(&self, steps: usize) -> Result<Vec<usize>> {
        (0..steps)
            .map(|t| {
                self.label_at(t).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "finite signal of length {} is too short for {} steps",
                        self.labels.len(),
                        steps
                    ))
                })
            })
            .collect()
    }
}

/// Closed elementary path in the automaton graph, canonicalized to start at
/// its lexicographically smallest state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cycle {
    transitions: Vec<Transition>,
}

impl Cycle {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.transitions.iter().map(|t| t.label).collect()
    }

    pub fn states(&self) -> Vec<String> {
        self.transitions.iter().map(|t| t.from.clone()).collect()
    }
}

impl std::fmt::Display for Cycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, t) in self.transitions.iter().enumerate() {
            if i == 0 {
                write!(f, "{}", t.from)?;
            }
            write!(f, " -{}-> {}", t.label, t.to)?;
        }
        Ok(())
    }
}

pub const DEFAULT_CYCLE_BUDGET: usize = 10_000;

/// All elementary cycles, each reported once (canonical start at the
/// smallest state). Parallel edges with different labels yield distinct
/// cycles. Aborts once more than `max_cycles` cycles are found.
pub fn enumerate_cycles(aut: &Automaton, max_cycles: usize) -> Result<Vec<Cycle>> {
    let n = aut.states().len();
    let mut by_from: Vec<Vec<&Transition>> = vec![Vec::new(); n];
    for t in aut.transitions() {
        by_from[aut.state_index(&t.from)].push(t);
    }
    let mut cycles = Vec::new();
    // Start-state-ordered DFS: a cycle is found exactly once, rooted at its
    // minimal state, visiting only larger states in between.
    for start in 0..n {
        let mut stack: Vec<Transition> = Vec::new();
        let mut on_path = vec![false; n];
        dfs(aut, &by_from, start, start, &mut stack, &mut on_path, &mut cycles, max_cycles)?;
    }
    cycles.sort();
    Ok(cycles)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    aut: &Automaton,
    by_from: &[Vec<&Transition>],
    start: usize,
    current: usize,
    stack: &mut Vec<Transition>,
    on_path: &mut Vec<bool>,
    cycles: &mut Vec<Cycle>,
    max_cycles: usize,
) -> Result<()> {
    on_path[current] = true;
    for t in &by_from[current] {
        let to = aut.state_index(&t.to);
        if to == start {
            stack.push((*t).clone());
            if cycles.len() >= max_cycles {
                return Err(Error::CycleBudget { cap: max_cycles });
            }
            cycles.push(Cycle { transitions: stack.clone() });
            stack.pop();
        } else if to > start && !on_path[to] {
            stack.push((*t).clone());
            dfs(aut, by_from, start, to, stack, on_path, cycles, max_cycles)?;
            stack.pop();
        }
    }
    on_path[current] = false;
    Ok(())
}

/// Outcome of a path-completeness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathCompleteness {
    Complete,
    /// A finite word realizable in the language automaton but not in the
    /// candidate.
    Counterexample(Vec<usize>),
}

/// Decide whether every finite label sequence realizable as a path in
/// `language` is realizable as a path in `candidate` (factor-language
/// inclusion with all states implicitly initial).
///
/// Powerset determinization of the candidate starting from its full state
/// set, product with the language automaton, breadth-first search. Reaching
/// a product node with an empty candidate macro-state yields the
/// counterexample along the search path.
pub fn path_complete_check(
    language: &Automaton,
    candidate: &Automaton,
) -> Result<PathCompleteness> {
    if language.alphabet_size() != candidate.alphabet_size() {
        return Err(Error::AlphabetMismatch(format!(
            "language alphabet {} vs candidate alphabet {}",
            language.alphabet_size(),
            candidate.alphabet_size()
        )));
    }
    let nc = candidate.states().len();
    if nc > 64 {
        return Err(Error::InvalidInput(
            "path-completeness check supports at most 64 candidate states".into(),
        ));
    }
    let full: u64 = if nc == 64 { u64::MAX } else { (1u64 << nc) - 1 };

    // candidate transition masks per (state, label)
    let mut step = vec![vec![0u64; candidate.alphabet_size() + 1]; nc];
    for t in candidate.transitions() {
        let from = candidate.state_index(&t.from);
        let to = candidate.state_index(&t.to);
        step[from][t.label] |= 1u64 << to;
    }
    let advance = |mask: u64, label: usize| -> u64 {
        let mut next = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            next |= step[i][label];
        }
        next
    };

    let mut visited: HashSet<(usize, u64)> = HashSet::new();
    let mut parent: HashMap<(usize, u64), ((usize, u64), usize)> = HashMap::new();
    let mut queue: VecDeque<(usize, u64)> = VecDeque::new();
    for l in 0..language.states().len() {
        let node = (l, full);
        if visited.insert(node) {
            queue.push_back(node);
        }
    }
    while let Some(node) = queue.pop_front() {
        let (lstate, mask) = node;
        let lname = &language.states()[lstate];
        for t in language.transitions().iter().filter(|t| &t.from == lname) {
            let next_mask = advance(mask, t.label);
            if next_mask == 0 {
                // Reconstruct the word along the BFS tree, then append the
                // failing label.
                let mut word = vec![t.label];
                let mut cur = node;
                while let Some((prev, label)) = parent.get(&cur) {
                    word.push(*label);
                    cur = *prev;
                }
                word.reverse();
                return Ok(PathCompleteness::Counterexample(word));
            }
            let next = (language.state_index(&t.to), next_mask);
            if visited.insert(next) {
                parent.insert(next, (node, t.label));
                queue.push_back(next);
            }
        }
    }
    Ok(PathCompleteness::Complete)
}

/// Small automata used across tests and examples.
pub mod fixtures {
    use super::*;

    /// Single state with self-loops on both labels; accepts every word on
    /// the alphabet {1, 2}.
    pub fn unconstrained() -> Automaton {
        Automaton::new(
            vec!["a".into()],
            2,
            vec![Transition::new("a", 1, "a"), Transition::new("a", 2, "a")],
        )
        .unwrap()
    }

    /// Accepts every word with no two consecutive 1's.
    pub fn no_consecutive_ones() -> Automaton {
        Automaton::new(
            vec!["a".into(), "b".into()],
            2,
            vec![
                Transition::new("a", 1, "b"),
                Transition::new("b", 2, "a"),
                Transition::new("a", 2, "a"),
            ],
        )
        .unwrap()
    }

    /// Accepts exactly the strict alternations of 1 and 2.
    pub fn strict_alternation() -> Automaton {
        Automaton::new(
            vec!["a".into(), "b".into()],
            2,
            vec![Transition::new("a", 1, "b"), Transition::new("b", 2, "a")],
        )
        .unwrap()
    }

    /// Five-state automaton with a triangle, a two-cycle chord, a bridge
    /// path b -> d -> e and a terminal self-loop. State d is on a path
    /// between loops but inside none.
    pub fn bridged_loops() -> Automaton {
        Automaton::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
            7,
            vec![
                Transition::new("a", 1, "b"),
                Transition::new("b", 2, "c"),
                Transition::new("c", 3, "a"),
                Transition::new("a", 4, "c"),
                Transition::new("b", 5, "d"),
                Transition::new("d", 6, "e"),
                Transition::new("e", 7, "e"),
            ],
        )
        .unwrap()
    }

    /// Bacterial-culture constraint: mode 3 can only follow mode 1 or 3.
    pub fn bacterial() -> Automaton {
        Automaton::new(
            vec!["a".into(), "b".into()],
            3,
            vec![
                Transition::new("a", 2, "a"),
                Transition::new("a", 1, "b"),
                Transition::new("b", 2, "a"),
                Transition::new("b", 1, "b"),
                Transition::new("b", 3, "b"),
            ],
        )
        .unwrap()
    }
}
