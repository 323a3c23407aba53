//! Weir-style probabilistic context-free grammar.
//!
//! A password is segmented into maximal runs of letters (L, either case),
//! digits (D) and specials (S). The run sequence is its base structure, the
//! run contents are terminals. Structure and terminal probabilities are plain
//! relative frequencies over the training multiset.
//!
//! Enumeration keeps a max-heap of (structure, index vector) nodes where each
//! index points into a slot's terminal list sorted by probability. Every
//! non-root node has exactly one parent: the node with the index at its
//! lowest nonzero position decremented. Popping a node therefore only needs to
//! push children that increment a position at or before the parent's own
//! lowest nonzero position.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GuessSource;
use crate::corpus::CharClass;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentClass {
    Letter,
    Digit,
    Special,
}

impl SegmentClass {
    fn of(byte: u8) -> Self {
        match CharClass::of(byte) {
            CharClass::Lower | CharClass::Upper => SegmentClass::Letter,
            CharClass::Digit => SegmentClass::Digit,
            CharClass::Special => SegmentClass::Special,
        }
    }

    fn symbol(self) -> char {
        match self {
            SegmentClass::Letter => 'L',
            SegmentClass::Digit => 'D',
            SegmentClass::Special => 'S',
        }
    }
}

/// One (class, run length) slot of a base structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub class: SegmentClass,
    pub len: usize,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.class.symbol(), self.len)
    }
}

/// A base structure such as `L2D1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Structure(pub Vec<Slot>);

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{s}"))
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::malformed("base structure", s);
        let mut slots = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let class = match rest.as_bytes()[0] {
                b'L' => SegmentClass::Letter,
                b'D' => SegmentClass::Digit,
                b'S' => SegmentClass::Special,
                _ => return Err(bad()),
            };
            rest = &rest[1..];
            let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
            let len: usize = rest[..digits].parse().map_err(|_| bad())?;
            if len == 0 {
                return Err(bad());
            }
            rest = &rest[digits..];
            slots.push(Slot { class, len });
        }
        if slots.is_empty() {
            return Err(bad());
        }
        Ok(Structure(slots))
    }
}

/// Splits a password into maximal single-class runs.
pub fn segment(password: &str) -> Vec<(Slot, &str)> {
    let bytes = password.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=bytes.len() {
        if i == bytes.len() || SegmentClass::of(bytes[i]) != SegmentClass::of(bytes[start]) {
            let slot = Slot {
                class: SegmentClass::of(bytes[start]),
                len: i - start,
            };
            out.push((slot, &password[start..i]));
            start = i;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Terminal {
    pub value: String,
    pub count: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureEntry {
    pub structure: Structure,
    pub count: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcfgModel {
    total: u64,
    /// Probability descending, then structure text ascending.
    structures: Vec<StructureEntry>,
    /// Per slot: probability descending, then value ascending.
    terminals: BTreeMap<Slot, Vec<Terminal>>,
}

fn sort_terminals(list: &mut [Terminal]) {
    list.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.value.cmp(&b.value))
    });
}

/// Learns structure and terminal frequencies from `train`.
pub fn train_pcfg<S: AsRef<str>>(train: &[S]) -> Result<PcfgModel> {
    let mut structure_counts: HashMap<Structure, u64> = HashMap::new();
    let mut terminal_counts: BTreeMap<Slot, HashMap<&str, u64>> = BTreeMap::new();
    let mut total = 0u64;
    for p in train {
        let p = p.as_ref();
        if p.is_empty() {
            continue;
        }
        if let Some(ch) = p.chars().find(|c| !c.is_ascii()) {
            return Err(Error::OutOfVocabulary { ch });
        }
        total += 1;
        let segments = segment(p);
        let structure = Structure(segments.iter().map(|(slot, _)| *slot).collect());
        *structure_counts.entry(structure).or_default() += 1;
        for (slot, text) in segments {
            *terminal_counts
                .entry(slot)
                .or_default()
                .entry(text)
                .or_default() += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput("pcfg training set"));
    }
    let structures = structure_counts.into_iter().collect::<Vec<_>>();
    let terminals = terminal_counts
        .into_iter()
        .map(|(slot, values)| {
            (
                slot,
                values
                    .into_iter()
                    .map(|(v, c)| (v.to_owned(), c))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    Ok(PcfgModel::from_counts(total, structures, terminals))
}

impl PcfgModel {
    fn from_counts(
        total: u64,
        structures: Vec<(Structure, u64)>,
        terminals: BTreeMap<Slot, Vec<(String, u64)>>,
    ) -> Self {
        let mut structures: Vec<(String, StructureEntry)> = structures
            .into_iter()
            .map(|(structure, count)| {
                (
                    structure.to_string(),
                    StructureEntry {
                        structure,
                        count,
                        probability: count as f64 / total as f64,
                    },
                )
            })
            .collect();
        structures.sort_by(|a, b| {
            b.1.probability
                .total_cmp(&a.1.probability)
                .then_with(|| a.0.cmp(&b.0))
        });
        let terminals = terminals
            .into_iter()
            .map(|(slot, values)| {
                let slot_total: u64 = values.iter().map(|(_, c)| c).sum();
                let mut list: Vec<Terminal> = values
                    .into_iter()
                    .map(|(value, count)| Terminal {
                        value,
                        count,
                        probability: count as f64 / slot_total as f64,
                    })
                    .collect();
                sort_terminals(&mut list);
                (slot, list)
            })
            .collect();
        PcfgModel {
            total,
            structures: structures.into_iter().map(|(_, e)| e).collect(),
            terminals,
        }
    }

    pub fn structures(&self) -> &[StructureEntry] {
        &self.structures
    }

    pub fn terminals(&self, slot: Slot) -> &[Terminal] {
        self.terminals.get(&slot).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.terminals.keys().copied()
    }

    /// Number of distinct strings the grammar can produce.
    pub fn expansion_count(&self) -> u128 {
        self.structures
            .iter()
            .map(|e| {
                e.structure
                    .0
                    .iter()
                    .map(|s| self.terminals(*s).len() as u128)
                    .product::<u128>()
            })
            .sum()
    }

    /// Probability of `password` under the grammar: structure probability
    /// times each terminal probability, multiplied left to right.
    pub fn probability(&self, password: &str) -> f64 {
        let segments = segment(password);
        let structure = Structure(segments.iter().map(|(s, _)| *s).collect());
        let Some(entry) = self.structures.iter().find(|e| e.structure == structure) else {
            return 0.0;
        };
        let mut p = entry.probability;
        for (slot, text) in segments {
            match self.terminals(slot).iter().find(|t| t.value == text) {
                Some(t) => p *= t.probability,
                None => return 0.0,
            }
        }
        p
    }

    pub(crate) fn to_file(&self) -> PcfgFile {
        PcfgFile {
            schema_version: crate::SCHEMA_VERSION,
            kind: "pcfg".into(),
            total_passwords: self.total,
            structures: self
                .structures
                .iter()
                .map(|e| StructureRecord {
                    structure: e.structure.to_string(),
                    count: e.count,
                    probability: e.probability,
                })
                .collect(),
            terminals: self
                .terminals
                .iter()
                .map(|(slot, list)| {
                    (
                        slot.to_string(),
                        list.iter()
                            .map(|t| TerminalRecord {
                                value: t.value.clone(),
                                count: t.count,
                                probability: t.probability,
                            })
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    /// Rebuilds from a file; probabilities are recomputed from the counts.
    pub(crate) fn from_file(file: PcfgFile) -> Result<Self> {
        if file.total_passwords == 0 {
            return Err(Error::malformed("pcfg model", "zero training total"));
        }
        let structures = file
            .structures
            .into_iter()
            .map(|r| Ok((r.structure.parse::<Structure>()?, r.count)))
            .collect::<Result<Vec<_>>>()?;
        if structures.iter().map(|(_, c)| c).sum::<u64>() != file.total_passwords {
            return Err(Error::malformed(
                "pcfg model",
                "structure counts do not sum to the total",
            ));
        }
        let mut terminals = BTreeMap::new();
        for (slot_text, records) in file.terminals {
            let slot = match slot_text.parse::<Structure>()?.0.as_slice() {
                [slot] => *slot,
                _ => return Err(Error::malformed("pcfg slot", slot_text)),
            };
            for r in &records {
                if r.value.len() != slot.len
                    || segment(&r.value).len() != 1
                    || SegmentClass::of(r.value.as_bytes()[0]) != slot.class
                {
                    return Err(Error::malformed(
                        "pcfg terminal",
                        format!("{:?} does not fit {slot}", r.value),
                    ));
                }
            }
            terminals.insert(
                slot,
                records.into_iter().map(|r| (r.value, r.count)).collect(),
            );
        }
        for (s, _) in &structures {
            if let Some(slot) = s.0.iter().find(|slot| !terminals.contains_key(*slot)) {
                return Err(Error::malformed(
                    "pcfg model",
                    format!("no terminals for slot {slot}"),
                ));
            }
        }
        Ok(Self::from_counts(
            file.total_passwords,
            structures,
            terminals,
        ))
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct StructureRecord {
    structure: String,
    count: u64,
    probability: f64,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TerminalRecord {
    value: String,
    count: u64,
    probability: f64,
}

/// On-disk form.
#[derive(Serialize, Deserialize)]
pub(crate) struct PcfgFile {
    schema_version: u32,
    kind: String,
    total_passwords: u64,
    structures: Vec<StructureRecord>,
    terminals: BTreeMap<String, Vec<TerminalRecord>>,
}

struct Node {
    probability: f64,
    guess: String,
    structure: usize,
    indices: Vec<u32>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: higher probability first, then the smaller string.
    fn cmp(&self, other: &Self) -> Ordering {
        self.probability
            .total_cmp(&other.probability)
            .then_with(|| other.guess.cmp(&self.guess))
    }
}

/// Streams grammar expansions in descending probability.
pub struct PcfgGuesses<'m> {
    model: &'m PcfgModel,
    slot_terminals: Vec<Vec<&'m [Terminal]>>,
    heap: BinaryHeap<Node>,
    limit: u64,
    emitted: u64,
}

pub fn enumerate_pcfg(model: &PcfgModel, limit: u64) -> PcfgGuesses<'_> {
    let slot_terminals: Vec<Vec<&[Terminal]>> = model
        .structures
        .iter()
        .map(|e| e.structure.0.iter().map(|s| model.terminals(*s)).collect())
        .collect();
    let mut guesses = PcfgGuesses {
        model,
        slot_terminals,
        heap: BinaryHeap::new(),
        limit,
        emitted: 0,
    };
    for i in 0..model.structures.len() {
        if guesses.slot_terminals[i].iter().all(|t| !t.is_empty()) {
            let node = guesses.node(i, vec![0; model.structures[i].structure.0.len()]);
            guesses.heap.push(node);
        }
    }
    guesses
}

impl<'m> PcfgGuesses<'m> {
    fn node(&self, structure: usize, indices: Vec<u32>) -> Node {
        let slots = &self.slot_terminals[structure];
        let mut probability = self.model.structures[structure].probability;
        let mut guess = String::new();
        for (terms, &i) in slots.iter().zip(&indices) {
            let t = &terms[i as usize];
            probability *= t.probability;
            guess.push_str(&t.value);
        }
        Node {
            probability,
            guess,
            structure,
            indices,
        }
    }

    /// Next guess together with its probability.
    pub fn next_with_probability(&mut self) -> Option<(String, f64)> {
        if self.emitted >= self.limit {
            return None;
        }
        let node = self.heap.pop()?;
        let lowest_nonzero = node
            .indices
            .iter()
            .position(|&i| i != 0)
            .unwrap_or(node.indices.len());
        let last = lowest_nonzero.min(node.indices.len() - 1);
        for j in 0..=last {
            if (node.indices[j] as usize) + 1 < self.slot_terminals[node.structure][j].len() {
                let mut indices = node.indices.clone();
                indices[j] += 1;
                let child = self.node(node.structure, indices);
                self.heap.push(child);
            }
        }
        self.emitted += 1;
        Some((node.guess, node.probability))
    }
}

impl GuessSource for PcfgGuesses<'_> {
    fn name(&self) -> &str {
        "pcfg"
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        Ok(self.next_with_probability().map(|(g, _)| g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot(class: SegmentClass, len: usize) -> Slot {
        Slot { class, len }
    }

    #[test]
    fn segmentation_groups_runs() {
        let segs: Vec<String> = segment("Pass12!!x")
            .iter()
            .map(|(s, t)| format!("{s}:{t}"))
            .collect();
        assert_eq!(segs, vec!["L4:Pass", "D2:12", "S2:!!", "L1:x"]);
    }

    #[test]
    fn hand_counted_grammar() {
        let m = train_pcfg(&["ab1", "cd2", "ab12"]).unwrap();
        let structs: Vec<(String, f64)> = m
            .structures()
            .iter()
            .map(|e| (e.structure.to_string(), e.probability))
            .collect();
        assert_eq!(
            structs,
            vec![
                ("L2D1".to_string(), 2.0 / 3.0),
                ("L2D2".to_string(), 1.0 / 3.0)
            ]
        );
        let l2: Vec<(&str, f64)> = m
            .terminals(slot(SegmentClass::Letter, 2))
            .iter()
            .map(|t| (t.value.as_str(), t.probability))
            .collect();
        assert_eq!(l2, vec![("ab", 2.0 / 3.0), ("cd", 1.0 / 3.0)]);
        let d1: Vec<&str> = m
            .terminals(slot(SegmentClass::Digit, 1))
            .iter()
            .map(|t| t.value.as_str())
            .collect();
        assert_eq!(d1, vec!["1", "2"]);
        assert_eq!(
            m.terminals(slot(SegmentClass::Digit, 2))[0].probability,
            1.0
        );
        assert_eq!(m.expansion_count(), 6);
    }

    #[test]
    fn first_guess_is_global_max() {
        let m = train_pcfg(&["ab1", "cd2", "ab12"]).unwrap();
        let mut g = enumerate_pcfg(&m, u64::MAX);
        let (first, p) = g.next_with_probability().unwrap();
        assert_eq!(first, "ab1");
        assert!((p - 2.0 / 9.0).abs() < 1e-15);
        let mut rest = vec![first];
        while let Some((s, _)) = g.next_with_probability() {
            rest.push(s);
        }
        assert_eq!(rest, vec!["ab1", "ab12", "ab2", "cd1", "cd12", "cd2"]);
    }

    #[test]
    fn single_terminal_grammar_exhausts() {
        let m = train_pcfg(&["!!"]).unwrap();
        assert_eq!(m.structures()[0].structure.to_string(), "S2");
        let mut g = enumerate_pcfg(&m, u64::MAX);
        assert_eq!(g.next_guess().unwrap().as_deref(), Some("!!"));
        assert_eq!(g.next_guess().unwrap(), None);
    }

    #[test]
    fn structure_parse_round_trip() {
        let s: Structure = "L12D3S1".parse().unwrap();
        assert_eq!(s.to_string(), "L12D3S1");
        assert!("X1".parse::<Structure>().is_err());
        assert!("L0".parse::<Structure>().is_err());
        assert!("".parse::<Structure>().is_err());
    }

    #[test]
    fn file_round_trip() {
        let m = train_pcfg(&["love12", "love12", "Abc!", "123456"]).unwrap();
        let back = PcfgModel::from_file(m.to_file()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_training_is_an_error() {
        assert!(train_pcfg::<&str>(&[]).is_err());
    }
}
