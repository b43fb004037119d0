// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Colour tags: a finite monoid given by its full composition table, attached
//! to state components for signalling and gating.
//!
//! Table text format: a header row naming the elements, then one row per
//! element (in header order) listing `row ∘ column` for every column.
//! `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::SynapseError;
use crate::quantum::QuantumState;

/// Index of an element in a [`ColorTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColorTag(pub usize);

/// Verified composition table: total, associative, with an identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorTable {
    names: Vec<String>,
    products: Vec<usize>,
    identity: ColorTag,
    absorbing: Option<ColorTag>,
}

pub const DEFAULT_TABLE: &str = "\
# neutral, excitatory, inhibitory and blocking signals
e       excite  inhibit block
e       excite  inhibit block
excite  excite  block   block
inhibit block   inhibit block
block   block   block   block
";

fn tag_error(msg: impl Into<String>) -> SynapseError {
    SynapseError::Tag(msg.into())
}

impl ColorTable {
    /// Build from element names and the product grid given as names.
    pub fn new(names: Vec<String>, grid: Vec<Vec<String>>) -> Result<Self, SynapseError> {
        let n = names.len();
        if n == 0 {
            return Err(tag_error("table has no elements"));
        }
        let mut uniq = BTreeSet::new();
        for name in &names {
            if !uniq.insert(name.as_str()) {
                return Err(tag_error(format!("element `{name}` listed twice")));
            }
        }
        if grid.len() != n {
            return Err(tag_error(format!("expected {n} product rows, found {}", grid.len())));
        }
        let lookup = |s: &str| {
            names.iter().position(|x| x == s).ok_or_else(|| tag_error(format!("unknown element `{s}` in grid")))
        };
        let mut products = Vec::with_capacity(n * n);
        for (r, row) in grid.iter().enumerate() {
            if row.len() != n {
                return Err(tag_error(format!("row `{}` has {} entries, expected {n}", names[r], row.len())));
            }
            for cell in row {
                products.push(lookup(cell)?);
            }
        }
        Self::from_indices(names, products)
    }

    fn from_indices(names: Vec<String>, products: Vec<usize>) -> Result<Self, SynapseError> {
        let n = names.len();
        let p = |a: usize, b: usize| products[a * n + b];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if p(p(a, b), c) != p(a, p(b, c)) {
                        return Err(tag_error(format!(
                            "not associative: ({0}∘{1})∘{2} ≠ {0}∘({1}∘{2})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| p(e, x) == x && p(x, e) == x))
            .ok_or_else(|| tag_error("table has no identity element"))?;
        let absorbing = (0..n).find(|&z| (0..n).all(|x| p(z, x) == z && p(x, z) == z));
        Ok(Self { names, products, identity: ColorTag(identity), absorbing: absorbing.map(ColorTag) })
    }

    pub fn parse(text: &str) -> Result<Self, SynapseError> {
        let mut rows = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>());
        let names = rows.next().ok_or_else(|| tag_error("empty table"))?;
        Self::new(names, rows.collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = self.names.join(" ");
        out.push('\n');
        for row in self.products.chunks_exact(self.len()) {
            let cells: Vec<&str> = row.iter().map(|&i| self.names[i].as_str()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn identity(&self) -> ColorTag {
        self.identity
    }

    pub fn absorbing(&self) -> Option<ColorTag> {
        self.absorbing
    }

    pub fn tags(&self) -> impl Iterator<Item = ColorTag> {
        (0..self.len()).map(ColorTag)
    }

    pub fn tag(&self, name: &str) -> Result<ColorTag, SynapseError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(ColorTag)
            .ok_or_else(|| tag_error(format!("unknown colour `{name}`")))
    }

    pub fn name(&self, tag: ColorTag) -> Option<&str> {
        self.names.get(tag.0).map(String::as_str)
    }

    pub fn contains(&self, tag: ColorTag) -> bool {
        tag.0 < self.len()
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| (0..n).all(|b| self.products[a * n + b] == self.products[b * n + a]))
    }
}

impl Default for ColorTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped colour table is valid")
    }
}

/// `a ∘ b` by table lookup.
pub fn compose_tags(a: ColorTag, b: ColorTag, table: &ColorTable) -> Result<ColorTag, SynapseError> {
    for t in [a, b] {
        if !table.contains(t) {
            return Err(tag_error(format!("tag {} not in a table of {} elements", t.0, table.len())));
        }
    }
    Ok(ColorTag(table.products[a.0 * table.len() + b.0]))
}

/// State whose components may carry colour tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedState {
    pub state: QuantumState,
    pub tags: Option<Vec<ColorTag>>,
}

impl TaggedState {
    pub fn new(state: QuantumState, tags: Vec<ColorTag>, table: &ColorTable) -> Result<Self, SynapseError> {
        if tags.len() != state.dim() {
            return Err(tag_error(format!("{} tags for a state of dimension {}", tags.len(), state.dim())));
        }
        if let Some(t) = tags.iter().find(|t| !table.contains(**t)) {
            return Err(tag_error(format!("tag {} not in table", t.0)));
        }
        Ok(Self { state, tags: Some(tags) })
    }

    pub fn untagged(state: QuantumState) -> Self {
        Self { state, tags: None }
    }
}

/// Zero every component whose tag is blocked, then renormalise. Tags are kept.
pub fn gate_by_tag(tagged: &TaggedState, blocked: &BTreeSet<ColorTag>) -> Result<TaggedState, SynapseError> {
    let tags = tagged.tags.as_ref().ok_or_else(|| tag_error("state carries no tags"))?;
    let amps = tagged.state.amplitudes();
    let hits: Vec<usize> =
        (0..amps.len()).filter(|&i| blocked.contains(&tags[i]) && amps[i].norm_sqr() > 0.0).collect();
    if hits.is_empty() {
        return Ok(tagged.clone());
    }
    let mut next = amps.to_vec();
    for i in hits {
        next[i] = num_complex::Complex64::new(0.0, 0.0);
    }
    let state = tagged.state.replace_normalized(next, "colour gating").map_err(|_| SynapseError::AllBlocked)?;
    Ok(TaggedState { state, tags: Some(tags.clone()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_laws() {
        let t = ColorTable::default();
        let e = t.tag("e").unwrap();
        let block = t.tag("block").unwrap();
        assert_eq!(t.identity(), e);
        assert_eq!(t.absorbing(), Some(block));
        assert!(t.is_commutative());
        for x in t.tags() {
            assert_eq!(compose_tags(e, x, &t).unwrap(), x);
            assert_eq!(compose_tags(x, block, &t).unwrap(), block);
        }
        assert_eq!(ColorTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn rejects_broken_tables() {
        // excite ∘ inhibit = e breaks associativity.
        let text = "e x y\ne x y\nx x e\ny e y\n";
        assert!(matches!(ColorTable::parse(text), Err(SynapseError::Tag(m)) if m.contains("associative")));
        // Missing identity.
        assert!(ColorTable::parse("a b\na a\na a\n").is_err());
        // Not total.
        assert!(ColorTable::parse("e x\ne x\nx\n").is_err());
        assert!(ColorTable::parse("e x\ne x\nx z\n").is_err());
    }

    #[test]
    fn unknown_tag_is_an_error() {
        let t = ColorTable::default();
        assert!(compose_tags(ColorTag(0), ColorTag(9), &t).is_err());
        assert!(t.tag("purple").is_err());
    }

    #[test]
    fn gating() {
        let t = ColorTable::default();
        let tags: Vec<ColorTag> = ["e", "excite", "inhibit", "block"].iter().map(|n| t.tag(n).unwrap()).collect();
        let s = TaggedState::new(QuantumState::uniform(4).unwrap(), tags.clone(), &t).unwrap();
        assert_eq!(gate_by_tag(&s, &BTreeSet::new()).unwrap(), s);

        let all_but_one: BTreeSet<ColorTag> = tags[..3].iter().copied().collect();
        let out = gate_by_tag(&s, &all_but_one).unwrap();
        assert_eq!(out.state.probabilities(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(out.tags.as_ref().unwrap(), &tags);

        let everything: BTreeSet<ColorTag> = tags.iter().copied().collect();
        assert!(matches!(gate_by_tag(&s, &everything), Err(SynapseError::AllBlocked)));
        assert!(gate_by_tag(&TaggedState::untagged(QuantumState::uniform(2).unwrap()), &everything).is_err());
    }
}
