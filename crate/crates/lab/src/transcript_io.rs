//! Line-delimited JSON transcripts: a header line, one line per round and a
//! summary line, each tagged by `"type"`.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};
use rbe_core::protocols::{EveRecord, EveStrategy, Protocol, RoundRecord, Transcript};
use serde::{Deserialize, Serialize};

use crate::record::TOOL_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranscriptLine {
    Header { protocol: Protocol, transmissions: usize, seed: u64, eve: EveStrategy, tool_version: String },
    Round(RoundRecord),
    Summary { alice_key: Vec<u8>, bob_key: Vec<u8>, aborted: bool, mismatches: usize, eve: Option<EveRecord> },
}

pub fn write_transcript<W: Write>(t: &Transcript, seed: u64, eve: &EveStrategy, mut out: W) -> anyhow::Result<()> {
    let mut line = |l: &TranscriptLine| -> anyhow::Result<()> {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    line(&TranscriptLine::Header {
        protocol: t.protocol,
        transmissions: t.rounds.len(),
        seed,
        eve: *eve,
        tool_version: TOOL_VERSION.into(),
    })?;
    for r in &t.rounds {
        line(&TranscriptLine::Round(r.clone()))?;
    }
    line(&TranscriptLine::Summary {
        alice_key: t.alice_key.clone(),
        bob_key: t.bob_key.clone(),
        aborted: t.aborted,
        mismatches: t.mismatches(),
        eve: t.eve.clone(),
    })?;
    out.flush()?;
    Ok(())
}

/// Reads a transcript back, returning it with the recorded seed.
pub fn read_transcript<R: BufRead>(input: R) -> anyhow::Result<(Transcript, u64)> {
    let mut header = None;
    let mut rounds = Vec::new();
    let mut summary = None;
    for (no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TranscriptLine =
            serde_json::from_str(&line).with_context(|| format!("transcript line {}", no + 1))?;
        match parsed {
            TranscriptLine::Header { protocol, transmissions, seed, .. } => {
                header = Some((protocol, transmissions, seed))
            }
            TranscriptLine::Round(r) => rounds.push(r),
            TranscriptLine::Summary { alice_key, bob_key, aborted, eve, .. } => {
                summary = Some((alice_key, bob_key, aborted, eve))
            }
        }
    }
    let (Some((protocol, transmissions, seed)), Some((alice_key, bob_key, aborted, eve))) = (header, summary) else {
        bail!("transcript is missing its header or summary line");
    };
    if rounds.len() != transmissions {
        bail!("header announces {transmissions} rounds, found {}", rounds.len());
    }
    Ok((Transcript { protocol, rounds, alice_key, bob_key, aborted, eve }, seed))
}
