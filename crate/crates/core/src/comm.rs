//! Message emission and inbox encoding — the only place where the six
//! communication variants differ.
//!
//! A message is `None` (no channel), a cluster `Index`, or a continuous
//! `Vector` (full representation for LatentComm, nearest centroid for
//! CentroidComm). Inboxes are flat `f64` vectors: one-hot per slot for index
//! messages, raw concatenation for vectors, ordered by ascending sender
//! index with the receiver's own slot omitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::CentroidTable;

/// One inter-agent message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Message {
    None,
    Index(usize),
    Vector(Vec<f64>),
}

impl Message {
    pub fn tag(&self) -> &'static str {
        match self {
            Message::None => "none",
            Message::Index(_) => "index",
            Message::Vector(_) => "vector",
        }
    }
}

/// The six communication variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommVariant {
    /// Uniform-random actions; no communication, no learning.
    Random,
    NoComm,
    /// Transmits the entire continuous representation.
    LatentComm,
    /// Transmits the index of the nearest centroid.
    ClusterComm,
    /// ClusterComm with ScaleNorm applied inside the observation encoder.
    SphericalClusterComm,
    /// Transmits the nearest centroid itself (or its index at test time).
    CentroidComm,
}

impl CommVariant {
    /// Any messages delivered at all?
    pub fn delivers_messages(self) -> bool {
        !matches!(self, CommVariant::Random | CommVariant::NoComm)
    }

    /// Maintains a centroid table.
    pub fn uses_clustering(self) -> bool {
        matches!(
            self,
            CommVariant::ClusterComm | CommVariant::SphericalClusterComm | CommVariant::CentroidComm
        )
    }

    /// Inbox slots are one-hot indices (width k) rather than vectors (width d).
    pub fn index_slots(self) -> bool {
        matches!(self, CommVariant::ClusterComm | CommVariant::SphericalClusterComm)
    }

    /// ScaleNorm inside the observation encoder.
    pub fn spherical(self) -> bool {
        matches!(self, CommVariant::SphericalClusterComm)
    }

    /// Policy is trained (everything except the Random baseline).
    pub fn trains(self) -> bool {
        !matches!(self, CommVariant::Random)
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "random" => Ok(CommVariant::Random),
            "no-comm" | "nocomm" => Ok(CommVariant::NoComm),
            "latent-comm" | "latentcomm" => Ok(CommVariant::LatentComm),
            "cluster-comm" | "clustercomm" => Ok(CommVariant::ClusterComm),
            "spherical-cluster-comm" | "sphericalclustercomm" => {
                Ok(CommVariant::SphericalClusterComm)
            }
            "centroid-comm" | "centroidcomm" => Ok(CommVariant::CentroidComm),
            other => Err(Error::Config(format!(
                "unknown communication variant '{other}' (expected one of: random, no-comm, \
                 latent-comm, cluster-comm, spherical-cluster-comm, centroid-comm)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CommVariant::Random => "random",
            CommVariant::NoComm => "no-comm",
            CommVariant::LatentComm => "latent-comm",
            CommVariant::ClusterComm => "cluster-comm",
            CommVariant::SphericalClusterComm => "spherical-cluster-comm",
            CommVariant::CentroidComm => "centroid-comm",
        }
    }
}

impl std::fmt::Display for CommVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat width of the encoded inbox an agent receives.
pub fn message_input_width(variant: CommVariant, n_agents: usize, k: usize, d: usize) -> usize {
    let peers = n_agents - 1;
    match variant {
        CommVariant::Random | CommVariant::NoComm => 0,
        CommVariant::ClusterComm | CommVariant::SphericalClusterComm => peers * k,
        CommVariant::LatentComm | CommVariant::CentroidComm => peers * d,
    }
}

/// The message an agent broadcasts this step, given its representation.
///
/// `table` is required only for clustering variants; non-clustering callers
/// pass `None`. Clustering variants with a not-yet-initialized table fall
/// back to the fixed placeholder: cluster 0 (whose centroid is still the
/// zero vector).
pub fn emit_message(
    variant: CommVariant,
    representation: &[f64],
    table: Option<&CentroidTable>,
    test_time_index_mode: bool,
) -> Result<Message> {
    let require_table = || {
        table.ok_or_else(|| {
            Error::Contract(format!("variant {variant} needs a centroid table to emit"))
        })
    };
    match variant {
        CommVariant::Random | CommVariant::NoComm => Ok(Message::None),
        CommVariant::LatentComm => Ok(Message::Vector(representation.to_vec())),
        CommVariant::ClusterComm | CommVariant::SphericalClusterComm => {
            let table = require_table()?;
            let idx = if table.initialized {
                table.assign(representation)?
            } else {
                0
            };
            Ok(Message::Index(idx))
        }
        CommVariant::CentroidComm => {
            let table = require_table()?;
            let idx = if table.initialized {
                table.assign(representation)?
            } else {
                0
            };
            if test_time_index_mode {
                Ok(Message::Index(idx))
            } else {
                Ok(Message::Vector(table.centroid(idx).to_vec()))
            }
        }
    }
}

/// Receiver-side lookup for CentroidComm's test-time index mode: an `Index`
/// is replaced by the sender's centroid so the inbox encoding is identical
/// to vector mode. Other tags pass through.
pub fn resolve_centroid_index(message: &Message, sender_table: &CentroidTable) -> Result<Message> {
    match message {
        Message::Index(i) => {
            if *i >= sender_table.k {
                return Err(Error::Contract(format!(
                    "centroid index {i} out of range for sender vocabulary k = {}",
                    sender_table.k
                )));
            }
            Ok(Message::Vector(sender_table.centroid(*i).to_vec()))
        }
        other => Ok(other.clone()),
    }
}

/// Flattens an ordered inbox (N-1 messages, ascending sender index) into the
/// network's message input. `None` in a slot encodes as zeros of the slot
/// width — the t = 0 placeholder.
pub fn encode_inbox(
    variant: CommVariant,
    inbox: &[Message],
    k: usize,
    d: usize,
) -> Result<Vec<f64>> {
    match variant {
        CommVariant::Random | CommVariant::NoComm => {
            for m in inbox {
                if *m != Message::None {
                    return Err(Error::Contract(format!(
                        "variant {variant} delivers no messages but inbox holds a {} message",
                        m.tag()
                    )));
                }
            }
            Ok(Vec::new())
        }
        CommVariant::ClusterComm | CommVariant::SphericalClusterComm => {
            let mut out = vec![0.0; inbox.len() * k];
            for (slot, m) in inbox.iter().enumerate() {
                match m {
                    Message::None => {}
                    Message::Index(i) => {
                        if *i >= k {
                            return Err(Error::Contract(format!(
                                "message index {i} outside vocabulary [0, {k})"
                            )));
                        }
                        out[slot * k + i] = 1.0;
                    }
                    Message::Vector(_) => {
                        return Err(Error::Contract(format!(
                            "mixed message tags: variant {variant} expects index messages, \
                             slot {slot} holds a vector"
                        )));
                    }
                }
            }
            Ok(out)
        }
        CommVariant::LatentComm | CommVariant::CentroidComm => {
            let mut out = vec![0.0; inbox.len() * d];
            for (slot, m) in inbox.iter().enumerate() {
                match m {
                    Message::None => {}
                    Message::Vector(v) => {
                        if v.len() != d {
                            return Err(Error::Contract(format!(
                                "message vector length {} does not match d = {d}",
                                v.len()
                            )));
                        }
                        out[slot * d..(slot + 1) * d].copy_from_slice(v);
                    }
                    Message::Index(_) => {
                        return Err(Error::Contract(format!(
                            "mixed message tags: variant {variant} expects vector messages, \
                             slot {slot} holds an index (resolve centroid indices first)"
                        )));
                    }
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_centroid_table() -> CentroidTable {
        CentroidTable {
            centroids: vec![0.0, 0.0, 10.0, 10.0],
            counts: vec![0, 0],
            k: 2,
            d: 2,
            initialized: true,
            skipped_nonfinite: 0,
        }
    }

    #[test]
    fn latent_comm_transmits_representation_unchanged() {
        let table = CentroidTable::uninitialized(2, 2).unwrap();
        let v = vec![0.25, -1.5];
        let m = emit_message(CommVariant::LatentComm, &v, Some(&table), false).unwrap();
        assert_eq!(m, Message::Vector(v));
    }

    #[test]
    fn cluster_comm_sends_nearest_index() {
        let table = two_centroid_table();
        let m = emit_message(CommVariant::ClusterComm, &[1.0, 1.0], Some(&table), false).unwrap();
        assert_eq!(m, Message::Index(0));
    }

    #[test]
    fn centroid_comm_sends_centroid_or_index() {
        let table = two_centroid_table();
        let m = emit_message(CommVariant::CentroidComm, &[1.0, 1.0], Some(&table), false).unwrap();
        assert_eq!(m, Message::Vector(vec![0.0, 0.0]));
        let m = emit_message(CommVariant::CentroidComm, &[1.0, 1.0], Some(&table), true).unwrap();
        assert_eq!(m, Message::Index(0));
    }

    #[test]
    fn no_comm_variants_send_none() {
        let table = two_centroid_table();
        for v in [CommVariant::Random, CommVariant::NoComm] {
            assert_eq!(emit_message(v, &[1.0, 1.0], Some(&table), false).unwrap(), Message::None);
        }
    }

    #[test]
    fn table_is_optional_exactly_for_non_clustering_variants() {
        for v in [
            CommVariant::Random,
            CommVariant::NoComm,
            CommVariant::LatentComm,
        ] {
            assert!(emit_message(v, &[1.0, 1.0], None, false).is_ok());
        }
        for v in [
            CommVariant::ClusterComm,
            CommVariant::SphericalClusterComm,
            CommVariant::CentroidComm,
        ] {
            assert!(emit_message(v, &[1.0, 1.0], None, false).is_err());
        }
    }

    #[test]
    fn uninitialized_table_placeholder_is_cluster_zero() {
        let table = CentroidTable::uninitialized(4, 2).unwrap();
        let m = emit_message(CommVariant::ClusterComm, &[7.0, 7.0], Some(&table), false).unwrap();
        assert_eq!(m, Message::Index(0));
        let m = emit_message(CommVariant::CentroidComm, &[7.0, 7.0], Some(&table), false).unwrap();
        assert_eq!(m, Message::Vector(vec![0.0, 0.0]));
    }

    #[test]
    fn one_hot_inbox_positions() {
        // N = 3, k = 8: ones at 2 and 8 + 5 = 13.
        let inbox = vec![Message::Index(2), Message::Index(5)];
        let enc = encode_inbox(CommVariant::ClusterComm, &inbox, 8, 32).unwrap();
        assert_eq!(enc.len(), 16);
        for (i, v) in enc.iter().enumerate() {
            let expect = if i == 2 || i == 13 { 1.0 } else { 0.0 };
            assert_eq!(*v, expect, "position {i}");
        }
    }

    #[test]
    fn one_hot_slots_sum_to_one_or_zero_for_placeholder() {
        let inbox = vec![Message::Index(3), Message::None, Message::Index(0)];
        let enc = encode_inbox(CommVariant::SphericalClusterComm, &inbox, 4, 32).unwrap();
        let sums: Vec<f64> = enc.chunks(4).map(|c| c.iter().sum()).collect();
        assert_eq!(sums, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn vector_inbox_is_verbatim_for_single_peer() {
        let v = vec![0.5, -0.25, 2.0];
        let enc = encode_inbox(CommVariant::LatentComm, &[Message::Vector(v.clone())], 8, 3).unwrap();
        assert_eq!(enc, v);
    }

    #[test]
    fn no_comm_inbox_encodes_to_zero_length() {
        let enc = encode_inbox(CommVariant::NoComm, &[Message::None, Message::None], 8, 32).unwrap();
        assert!(enc.is_empty());
    }

    #[test]
    fn mixed_tags_are_contract_violations() {
        let err = encode_inbox(
            CommVariant::ClusterComm,
            &[Message::Index(1), Message::Vector(vec![0.0; 2])],
            4,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
        let err = encode_inbox(
            CommVariant::LatentComm,
            &[Message::Vector(vec![0.0; 2]), Message::Index(1)],
            4,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
        let err =
            encode_inbox(CommVariant::NoComm, &[Message::Index(0)], 4, 2).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    #[test]
    fn out_of_vocabulary_index_is_rejected() {
        let err = encode_inbox(CommVariant::ClusterComm, &[Message::Index(4)], 4, 2).unwrap_err();
        assert!(err.to_string().contains("vocabulary"), "{err}");
    }

    #[test]
    fn widths_match_variant_family() {
        assert_eq!(message_input_width(CommVariant::ClusterComm, 4, 8, 32), 24);
        assert_eq!(message_input_width(CommVariant::NoComm, 4, 8, 32), 0);
        assert_eq!(message_input_width(CommVariant::Random, 2, 8, 32), 0);
        assert_eq!(message_input_width(CommVariant::CentroidComm, 2, 8, 32), 32);
        assert_eq!(message_input_width(CommVariant::LatentComm, 3, 8, 32), 64);
        assert_eq!(
            message_input_width(CommVariant::SphericalClusterComm, 2, 16, 32),
            16
        );
    }

    #[test]
    fn centroid_index_mode_matches_vector_mode_after_lookup() {
        let table = two_centroid_table();
        let repr = [9.0, 9.5];
        let vector_mode =
            emit_message(CommVariant::CentroidComm, &repr, Some(&table), false).unwrap();
        let index_mode = emit_message(CommVariant::CentroidComm, &repr, Some(&table), true).unwrap();
        let resolved = resolve_centroid_index(&index_mode, &table).unwrap();
        assert_eq!(vector_mode, resolved);
        let enc_a =
            encode_inbox(CommVariant::CentroidComm, &[vector_mode], table.k, table.d).unwrap();
        let enc_b =
            encode_inbox(CommVariant::CentroidComm, &[resolved], table.k, table.d).unwrap();
        assert_eq!(enc_a, enc_b);
    }

    #[test]
    fn emit_is_pure_given_frozen_state() {
        let table = two_centroid_table();
        let a = emit_message(CommVariant::ClusterComm, &[3.0, 3.0], Some(&table), false).unwrap();
        let b = emit_message(CommVariant::ClusterComm, &[3.0, 3.0], Some(&table), false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            CommVariant::Random,
            CommVariant::NoComm,
            CommVariant::LatentComm,
            CommVariant::ClusterComm,
            CommVariant::SphericalClusterComm,
            CommVariant::CentroidComm,
        ] {
            assert_eq!(CommVariant::parse(v.name()).unwrap(), v);
        }
        assert!(CommVariant::parse("telepathy").is_err());
    }
}
