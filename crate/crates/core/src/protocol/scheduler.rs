use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::server::ServerState;
use crate::error::{Error, Result};
use crate::field::{sample_uniform_vector, FieldElement, FieldVector, Prime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "carpsi")]
    CarPsi,
    #[serde(rename = "findpsi")]
    FindPsi,
    #[serde(rename = "thpsi-car")]
    ThPsiCar,
    #[serde(rename = "thpsi-find")]
    ThPsiFind,
    /// Membership probes of the naive baseline.
    #[serde(rename = "psi")]
    Psi,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::CarPsi => "carpsi",
            Phase::FindPsi => "findpsi",
            Phase::ThPsiCar => "thpsi-car",
            Phase::ThPsiFind => "thpsi-find",
            Phase::Psi => "psi",
        }
    }
}

/// One query/answer exchange with a single database. `query` holds the
/// residues of the query vector, or is empty when queries are not recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub phase: Phase,
    pub round: usize,
    pub db: usize,
    pub query: Vec<u64>,
    pub answer: u64,
    pub downloaded: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
    total_download: usize,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, message: Message) {
        self.total_download += message.downloaded;
        self.messages.push(message);
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// Download cost `D`: symbols received by the client.
    pub fn total_download(&self) -> usize {
        self.total_download
    }

    pub fn phase_downloads(&self) -> BTreeMap<Phase, usize> {
        let mut out = BTreeMap::new();
        for m in &self.messages {
            *out.entry(m.phase).or_insert(0) += m.downloaded;
        }
        out
    }

    pub fn rounds_used(&self) -> usize {
        self.messages.iter().map(|m| m.round).max().unwrap_or(0)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("message serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut t = Transcript::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let m: Message =
                serde_json::from_str(line).map_err(|e| Error::MalformedTranscript(format!("line {}: {e}", n + 1)))?;
            t.push(m);
        }
        Ok(t)
    }
}

/// Scope of one fresh mask `h_k` and one randomness symbol `S_k`. The
/// randomness symbol itself stays on the server; the client only knows its
/// index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub k: usize,
    pub mask: FieldVector,
    pub used_dbs: Vec<usize>,
    pub reference_answer: Option<FieldElement>,
}

/// Serves payload requests `vᵀX_2` one at a time. A round opens with a
/// reference query `h_k` to the lowest-numbered database, then carries up to
/// `N2 − 1` payload queries `h_k + v` to the next unused databases. A new
/// round starts only when the current one has used every database.
pub struct RoundScheduler<'a, R> {
    server: &'a ServerState,
    rng: R,
    modulus: Prime,
    len: usize,
    rounds: Vec<Round>,
    transcript: Transcript,
    record_queries: bool,
}

impl<'a, R: Rng> RoundScheduler<'a, R> {
    pub fn new(server: &'a ServerState, rng: R, record_queries: bool) -> Self {
        RoundScheduler {
            server,
            rng,
            modulus: server.x2().modulus(),
            len: server.x2().len(),
            rounds: Vec::new(),
            transcript: Transcript::new(),
            record_queries,
        }
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn alphabet_len(&self) -> usize {
        self.len
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn finish(self) -> (Transcript, Vec<Round>) {
        (self.transcript, self.rounds)
    }

    fn log(&mut self, phase: Phase, round: usize, db: usize, query: &FieldVector, answer: FieldElement) {
        self.transcript.push(Message {
            phase,
            round,
            db,
            query: if self.record_queries { query.residues().to_vec() } else { Vec::new() },
            answer: answer.value(),
            downloaded: 1,
        });
    }

    fn open_round(&mut self, phase: Phase) -> Result<()> {
        let k = self.rounds.len() + 1;
        let supply = self.server.randomness().len();
        if k > supply {
            return Err(Error::RandomnessExhausted { round: k, supply });
        }
        let mask = sample_uniform_vector(&mut self.rng, self.modulus, self.len);
        let db = self.server.database(1)?;
        let answer = db.answer(&mask, k)?;
        self.log(phase, k, db.id(), &mask, answer);
        self.rounds.push(Round { k, mask, used_dbs: vec![db.id()], reference_answer: Some(answer) });
        Ok(())
    }

    /// Privately evaluates `payloadᵀ X_2`. Costs one download, plus one more
    /// for the reference query whenever a new round has to be opened.
    pub fn request_payload(&mut self, phase: Phase, payload: &FieldVector) -> Result<FieldElement> {
        if payload.modulus() != self.modulus {
            return Err(Error::ModulusMismatch { left: payload.modulus().get(), right: self.modulus.get() });
        }
        if payload.len() != self.len {
            return Err(Error::LengthMismatch { left: payload.len(), right: self.len });
        }
        let n2 = self.server.n2();
        if self.rounds.last().is_none_or(|r| r.used_dbs.len() == n2) {
            self.open_round(phase)?;
        }
        let round = self.rounds.last().expect("round is open");
        let (k, reference) = (round.k, round.reference_answer.expect("reference answer is set"));
        let db = self.server.database(round.used_dbs.len() + 1)?;
        let query = round.mask.add(payload)?;
        let answer = db.answer(&query, k)?;
        self.rounds.last_mut().expect("round is open").used_dbs.push(db.id());
        self.log(phase, k, db.id(), &query, answer);
        answer.sub(reference)
    }
}
