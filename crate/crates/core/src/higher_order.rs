//! Second-order mutants built from disjoint pairs of first-order mutants.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::java::{splice, Edit, SourceFile};
use crate::mutation::{render_header, HeaderFields, Mutant, MutantId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HigherOrderMutant {
    pub mutant_id: u32,
    /// The first-order mutants combined, in edit order.
    pub constituents: Vec<Mutant>,
    pub source_path: PathBuf,
}

impl HigherOrderMutant {
    pub fn id(&self) -> MutantId {
        MutantId::Higher(self.mutant_id)
    }

    pub fn constituent_ids(&self) -> Vec<MutantId> {
        self.constituents.iter().map(Mutant::id).collect()
    }

    /// Union of the constituent edits, ordered by position.
    pub fn edits(&self) -> Vec<Edit> {
        let mut edits: Vec<Edit> = self
            .constituents
            .iter()
            .flat_map(|m| m.edits.iter().cloned())
            .collect();
        edits.sort_by_key(|e| (e.span.start, e.span.end));
        edits
    }

    pub fn operator(&self) -> String {
        self.constituents
            .iter()
            .map(|m| m.operator.name())
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn header(&self) -> HeaderFields {
        HeaderFields {
            mutant_id: self.id(),
            operator: self.operator(),
            constituents: self.constituent_ids(),
            statements: self
                .constituents
                .iter()
                .map(|m| (m.before.clone(), m.after.clone()))
                .collect(),
            lines: self.constituents.iter().map(|m| m.line).collect(),
            node_ids: self
                .constituents
                .iter()
                .map(|m| m.node_ids.clone())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<HigherOrderMutant>,
    /// First-order ids left without a partner.
    pub leftovers: Vec<u32>,
}

fn disjoint(a: &Mutant, b: &Mutant) -> bool {
    a.edits
        .iter()
        .all(|x| b.edits.iter().all(|y| !x.span.overlaps(y.span)))
}

/// Seeded random maximal pairing of mutants with disjoint edits.
///
/// Mutants are shuffled, then each unpaired mutant takes the first later
/// unpaired partner it does not overlap. Any two leftovers overlap, so the
/// pairing is maximal. Mutants of different files are never paired.
pub fn pair_mutants(mutants: &[Mutant], seed: u64) -> Pairing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..mutants.len()).collect();
    order.shuffle(&mut rng);

    let mut taken = vec![false; mutants.len()];
    let mut pairing = Pairing::default();
    for (pos, &i) in order.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let partner = order[pos + 1..].iter().copied().find(|&j| {
            !taken[j]
                && mutants[j].source_path == mutants[i].source_path
                && disjoint(&mutants[i], &mutants[j])
        });
        if let Some(j) = partner {
            taken[i] = true;
            taken[j] = true;
            let mut constituents = vec![mutants[i].clone(), mutants[j].clone()];
            constituents.sort_by_key(|m| m.edits.first().map(|e| e.span.start));
            pairing.pairs.push(HigherOrderMutant {
                mutant_id: pairing.pairs.len() as u32 + 1,
                constituents,
                source_path: mutants[i].source_path.clone(),
            });
        }
    }
    pairing.leftovers = mutants
        .iter()
        .zip(&taken)
        .filter(|(_, t)| !**t)
        .map(|(m, _)| m.mutant_id)
        .collect();
    pairing
}

pub fn render_higher_order(file: &SourceFile, hom: &HigherOrderMutant) -> Result<Vec<u8>> {
    if hom.constituents.len() != 2 {
        return Err(Error::Arity(hom.constituents.len()));
    }
    let body = splice(file.content(), &hom.edits())?;
    let mut out = render_header(&hom.header()).into_bytes();
    out.extend_from_slice(&body);
    Ok(out)
}
