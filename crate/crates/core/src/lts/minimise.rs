//! Strong-bisimulation minimisation by signature refinement, and the
//! bisimilarity check built on top of it.
//!
//! The kernel iterates `signature(s) = { (label, block(target)) }` and splits
//! blocks until no signature distinguishes two states of a block. Worst case
//! O(m·n), which is fine at the scales this crate targets; a
//! Paige–Tarjan-style splitter queue could replace it behind the same
//! interface.

use std::collections::{BTreeSet, HashMap};

use super::{Lts, MultiActionValue, Transition};

// Distinct labels in canonical order; signature entries use the rank so the
// sets stay small and comparable.
fn label_table(lts: &Lts) -> HashMap<&MultiActionValue, u32> {
    lts.label_set()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i as u32))
        .collect()
}

// One refinement pass: split every block by the signatures of its states.
// New block numbers are assigned by first occurrence in state order, which
// keeps numbering deterministic.
fn refine_once(
    adjacency: &[Vec<(u32, usize)>],
    blocks: &[usize],
) -> (Vec<usize>, usize) {
    let mut groups: HashMap<(usize, Vec<(u32, usize)>), usize> = HashMap::new();
    let mut next = Vec::with_capacity(blocks.len());
    for (state, outgoing) in adjacency.iter().enumerate() {
        let signature: BTreeSet<(u32, usize)> = outgoing
            .iter()
            .map(|&(label, dst)| (label, blocks[dst]))
            .collect();
        let key = (blocks[state], signature.into_iter().collect::<Vec<_>>());
        let fresh = groups.len();
        next.push(*groups.entry(key).or_insert(fresh));
    }
    let count = groups.len();
    (next, count)
}

// Runs refinement to a fixpoint. Returns the partition after every round,
// starting with the trivial one-block partition; the last entry is stable.
fn refine_history(lts: &Lts) -> Vec<Vec<usize>> {
    let labels = label_table(lts);
    let mut adjacency: Vec<Vec<(u32, usize)>> = vec![Vec::new(); lts.num_states];
    for t in &lts.transitions {
        adjacency[t.src].push((labels[&t.label], t.dst));
    }

    let mut history = vec![vec![0; lts.num_states]];
    let mut count = 1;
    loop {
        let (next, next_count) = refine_once(&adjacency, history.last().unwrap());
        if next_count == count {
            break;
        }
        count = next_count;
        history.push(next);
    }
    history
}

/// Minimises a finite LTS modulo strong bisimulation.
///
/// Returns the quotient together with the partition mapping each state of
/// `lts` to its block, which is also the quotient state identifier. Two
/// states share a block exactly when they are bisimilar, so no two distinct
/// quotient states are bisimilar and minimising again is the identity.
pub fn minimise_bisim(lts: &Lts) -> (Lts, Vec<usize>) {
    if lts.num_states == 0 {
        return (lts.clone(), Vec::new());
    }
    let partition = refine_history(lts).pop().unwrap();
    let num_blocks = partition.iter().max().unwrap() + 1;

    let mut transitions: Vec<Transition> = lts
        .transitions
        .iter()
        .map(|t| Transition::new(partition[t.src], t.label.clone(), partition[t.dst]))
        .collect();
    transitions.sort();
    transitions.dedup();

    // Annotate each block with the annotation of its first representative.
    let state_labels = lts.state_labels.as_ref().map(|annotations| {
        let mut out = vec![String::new(); num_blocks];
        let mut seen = vec![false; num_blocks];
        for (state, &block) in partition.iter().enumerate() {
            if !seen[block] {
                seen[block] = true;
                out[block] = annotations[state].clone();
            }
        }
        out
    });

    let quotient = Lts {
        num_states: num_blocks,
        initial: partition[lts.initial],
        transitions,
        state_labels,
        truncated: lts.truncated,
    };
    (quotient, partition)
}

/// The verdict of [`check_bisim`], with a best-effort distinguishing label
/// sequence when the systems differ.
#[derive(Debug, Clone)]
pub struct BisimResult {
    pub bisimilar: bool,
    /// A minimal-depth sequence of labels along which one system can move
    /// and the other cannot match. Present only when `bisimilar` is false.
    pub witness: Option<Vec<MultiActionValue>>,
}

/// Decides strong bisimilarity of the initial states of two systems by
/// minimising their disjoint union and comparing initial blocks.
pub fn check_bisim(left: &Lts, right: &Lts) -> BisimResult {
    let offset = left.num_states;
    let mut transitions: Vec<Transition> = left.transitions.clone();
    transitions.extend(right.transitions.iter().map(|t| {
        Transition::new(t.src + offset, t.label.clone(), t.dst + offset)
    }));
    let union = Lts::new(left.num_states + right.num_states, left.initial, transitions);

    let history = refine_history(&union);
    let stable = history.last().unwrap();
    let (s, t) = (left.initial, right.initial + offset);
    if stable[s] == stable[t] {
        return BisimResult {
            bisimilar: true,
            witness: None,
        };
    }

    let labels = label_table(&union);
    let mut adjacency: Vec<Vec<(u32, usize)>> = vec![Vec::new(); union.num_states];
    for tr in &union.transitions {
        adjacency[tr.src].push((labels[&tr.label], tr.dst));
    }
    // Deterministic successor order for witness construction.
    for row in &mut adjacency {
        row.sort();
    }
    let by_rank: HashMap<u32, &MultiActionValue> =
        labels.iter().map(|(l, r)| (*r, *l)).collect();

    let witness = distinguish(&history, &adjacency, s, t)
        .into_iter()
        .map(|rank| by_rank[&rank].clone())
        .collect();
    BisimResult {
        bisimilar: false,
        witness: Some(witness),
    }
}

// Builds a label sequence separating s and t, walking back through the
// refinement rounds: at the first round that splits them, some (label,
// block) signature entry is one-sided; follow it and recurse one round
// earlier. The depth equals the splitting round, hence is minimal.
fn distinguish(
    history: &[Vec<usize>],
    adjacency: &[Vec<(u32, usize)>],
    s: usize,
    t: usize,
) -> Vec<u32> {
    let round = match history.iter().position(|p| p[s] != p[t]) {
        Some(r) => r,
        None => return Vec::new(),
    };
    debug_assert!(round > 0);
    let previous = &history[round - 1];

    let signature = |state: usize| -> BTreeSet<(u32, usize)> {
        adjacency[state]
            .iter()
            .map(|&(label, dst)| (label, previous[dst]))
            .collect()
    };
    let sig_s = signature(s);
    let sig_t = signature(t);

    // Take the mover to be the side owning the one-sided entry; the label
    // sequence itself does not depend on which side that is.
    let (mover, other, entry) = match sig_s.difference(&sig_t).next() {
        Some(e) => (s, t, *e),
        None => {
            let e = *sig_t.difference(&sig_s).next().expect("split without witness");
            (t, s, e)
        }
    };
    let (label, target_block) = entry;

    let follower: Vec<usize> = adjacency[other]
        .iter()
        .filter(|&&(l, _)| l == label)
        .map(|&(_, dst)| dst)
        .collect();
    if follower.is_empty() {
        return vec![label];
    }

    let mover_next = adjacency[mover]
        .iter()
        .find(|&&(l, dst)| l == label && previous[dst] == target_block)
        .map(|&(_, dst)| dst)
        .expect("signature entry without transition");
    // Any matching move of the follower lands in a different block one
    // round earlier, so the recursion terminates.
    let follower_next = follower[0];

    let mut sequence = vec![label];
    sequence.extend(distinguish(history, adjacency, mover_next, follower_next));
    sequence
}
