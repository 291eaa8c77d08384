//! The batch commands behind the CLI, as plain functions over loaded data.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{SystemTime, UNIX_EPOCH};

use metaqa_core::distractor::{
    answer_tokens, assemble_mcq, generate_distractors, item_seed, Distractor, DistractorConfig, Mcq,
};
use metaqa_core::msdip::{learn, Origin};
use metaqa_core::preprocess::assess_suitability;
use metaqa_core::qapgen::{generate_qaps, Rejection, TeachRequest};
use metaqa_core::resources::UnigramTable;
use metaqa_core::tp3::{filter_question, main_body, preprocess_answers, ContextSentence, RuleSet, Selection};
use metaqa_core::{MergeMode, MsdipStore, Qap, TaggedSentence};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::{load_unigrams, Assets};
use crate::config::{required, ConfigError, RunConfig};
use crate::io::{self, ExternalQa, IoError, PairRecord};

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Data(String),
}

impl AppError {
    /// 0 success, 1 data error, 2 config error.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnStats {
    pub pairs_read: usize,
    pub mds_added: usize,
    pub mis_added: usize,
}

/// Learns every (declarative, interrogative) pair; stops at the first
/// failure, naming the sentence.
pub fn learn_records(
    records: &[PairRecord],
    store: &mut MsdipStore,
    mode: MergeMode,
    origin: Origin,
    now: u64,
) -> Result<LearnStats, AppError> {
    let mds_before = store.len();
    let mut stats = LearnStats::default();
    for r in records {
        for q in &r.interrogatives {
            stats.pairs_read += 1;
            let l = learn(&r.declarative, q, mode, store, origin, now)
                .map_err(|e| AppError::Data(format!("{} / {}: {e}", r.declarative.id, q.id)))?;
            stats.mis_added += usize::from(l.added);
        }
    }
    stats.mds_added = store.len() - mds_before;
    Ok(stats)
}

pub fn cmd_learn(cfg: &RunConfig) -> Result<LearnStats, AppError> {
    let records = io::read_pairs(required("pairs", &cfg.pairs)?)?;
    let mut store = io::load_store_or_empty(&cfg.msdip)?;
    let stats = learn_records(&records, &mut store, cfg.mode, Origin::Seed, unix_now())?;
    if stats.mis_added > 0 || !cfg.msdip.exists() {
        io::save_store(&cfg.msdip, &store)?;
    }
    Ok(stats)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateStats {
    pub sentences: usize,
    pub qaps: usize,
    pub teach_requests: usize,
    pub rejections: usize,
    /// QAPs per match kind.
    pub per_kind: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateOutput {
    pub qaps: Vec<Qap>,
    pub teach_requests: Vec<TeachRequest>,
    pub rejections: Vec<Rejection>,
    pub stats: GenerateStats,
}

fn kind_name(k: metaqa_core::matcher::MatchKind) -> String {
    serde_json::to_value(k)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// Generates over a corpus in order. Teach requests are deduplicated by the
/// unmatched meta sequence.
pub fn generate_corpus(
    corpus: &[TaggedSentence],
    store: &MsdipStore,
    mode: MergeMode,
) -> Result<GenerateOutput, AppError> {
    let mut out = GenerateOutput::default();
    let mut seen_xs = BTreeSet::new();
    for s in corpus {
        let g = generate_qaps(s, store, mode).map_err(|e| AppError::Data(e.to_string()))?;
        out.qaps.extend(g.qaps);
        out.rejections.extend(g.rejections);
        out.teach_requests
            .extend(g.teach_requests.into_iter().filter(|t| seen_xs.insert(t.xs.encode())));
    }
    out.stats.sentences = corpus.len();
    out.stats.qaps = out.qaps.len();
    out.stats.teach_requests = out.teach_requests.len();
    out.stats.rejections = out.rejections.len();
    for q in &out.qaps {
        *out.stats.per_kind.entry(kind_name(q.match_kind)).or_default() += 1;
    }
    Ok(out)
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateStats, AppError> {
    let corpus = io::read_corpus(required("corpus", &cfg.corpus)?)?;
    let store = io::load_store(&cfg.msdip)?;
    let out = generate_corpus(&corpus, &store, cfg.mode)?;
    io::write_jsonl(&cfg.out_dir.join("qaps.jsonl"), &out.qaps)?;
    io::write_jsonl(&cfg.out_dir.join("teach_requests.jsonl"), &out.teach_requests)?;
    io::write_jsonl(&cfg.out_dir.join("rejections.jsonl"), &out.rejections)?;
    Ok(out.stats)
}

/// Candidate answers selected from one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub sentence_id: String,
    #[serde(flatten)]
    pub selection: Selection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    #[serde(flatten)]
    pub qa: ExternalQa,
    pub main_body: String,
    #[serde(flatten)]
    pub verdict: metaqa_core::tp3::FilterVerdict,
}

/// The sentence at `ordinal` of `article` and its neighbours, in order.
fn context<'a>(corpus: &'a [TaggedSentence], article: &str, ordinal: u32) -> Vec<&'a TaggedSentence> {
    let mut ctx: Vec<&TaggedSentence> = corpus
        .iter()
        .filter(|s| s.source.article == article && s.source.ordinal.abs_diff(ordinal) <= 1)
        .collect();
    ctx.sort_by_key(|s| s.source.ordinal);
    ctx
}

pub fn filter_questions(qas: &[ExternalQa], corpus: &[TaggedSentence], rules: &RuleSet) -> Vec<VerdictRecord> {
    qas.iter()
        .map(|qa| {
            let ctx = context(corpus, &qa.article, qa.sentence_ordinal);
            let middle = ctx.iter().find(|s| s.source.ordinal == qa.sentence_ordinal);
            let body = main_body(&qa.answer, middle.and_then(|s| s.constituency.as_deref()))
                .unwrap_or_else(|| qa.answer.clone());
            let sentences: Vec<ContextSentence> = ctx
                .iter()
                .map(|s| ContextSentence {
                    text: s.text(),
                    suitable: assess_suitability(s).suitable,
                })
                .collect();
            VerdictRecord {
                verdict: filter_question(&qa.question, &body, &sentences, rules),
                qa: qa.clone(),
                main_body: body,
            }
        })
        .collect()
}

pub fn select_corpus_answers(corpus: &[TaggedSentence], freq: &UnigramTable, rules: &RuleSet) -> Vec<AnswerRecord> {
    corpus
        .iter()
        .map(|s| AnswerRecord {
            sentence_id: s.id.clone(),
            selection: preprocess_answers(s, freq, rules),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub sentences: usize,
    pub candidates_kept: usize,
    pub candidates_rejected: usize,
    pub questions: usize,
    pub questions_kept: usize,
}

pub fn cmd_filter(cfg: &RunConfig) -> Result<FilterStats, AppError> {
    let corpus = io::read_corpus(required("corpus", &cfg.corpus)?)?;
    let freq = match &cfg.unigrams {
        Some(p) => load_unigrams(p)?,
        None => UnigramTable::new(),
    };
    let rules = RuleSet::all();
    let answers = select_corpus_answers(&corpus, &freq, &rules);
    io::write_jsonl(&cfg.out_dir.join("answers.jsonl"), &answers)?;
    let mut stats = FilterStats {
        sentences: corpus.len(),
        candidates_kept: answers.iter().map(|a| a.selection.kept.len()).sum(),
        candidates_rejected: answers.iter().map(|a| a.selection.rejected.len()).sum(),
        ..FilterStats::default()
    };
    if let Some(q) = &cfg.questions {
        let verdicts = filter_questions(&io::read_external(q)?, &corpus, &rules);
        stats.questions = verdicts.len();
        stats.questions_kept = verdicts.iter().filter(|v| v.verdict.keep).count();
        io::write_jsonl(&cfg.out_dir.join("verdicts.jsonl"), &verdicts)?;
    }
    Ok(stats)
}

/// Named-entity runs of a sentence as `(text, tag)`.
pub fn entity_runs(s: &TaggedSentence) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.tokens.len() {
        let ne = &s.tokens[i].ne;
        if ne.is_empty() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < s.tokens.len() && s.tokens[j].ne == *ne {
            j += 1;
        }
        let text = metaqa_core::text::detokenize(s.tokens[i..j].iter().map(|t| t.text.as_str()));
        out.push((text, ne.clone()));
        i = j;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorRecord {
    pub qap_id: String,
    pub question: String,
    pub answer: String,
    pub distractors: Vec<Distractor>,
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistractSettings {
    pub interval: (f64, f64),
    pub seed: u64,
    pub n: usize,
}

impl DistractSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        DistractSettings {
            interval: cfg.interval,
            seed: cfg.seed,
            n: cfg.distractors,
        }
    }
}

pub fn distract_qap(
    qap: &Qap,
    corpus: &[TaggedSentence],
    assets: &Assets,
    settings: DistractSettings,
) -> DistractorRecord {
    let mut rec = DistractorRecord {
        qap_id: qap.id.clone(),
        question: qap.question.clone(),
        answer: qap.answer.clone(),
        distractors: Vec::new(),
        partial: true,
        error: None,
    };
    let Some(source) = corpus.iter().find(|s| s.id == qap.source) else {
        rec.error = Some(format!("source sentence {} not in corpus", qap.source));
        return rec;
    };
    let article: Vec<(String, String)> = corpus
        .iter()
        .filter(|s| s.id == source.id || (!source.source.article.is_empty() && s.source.article == source.source.article))
        .flat_map(entity_runs)
        .collect();
    let cfg = DistractorConfig {
        interval: settings.interval,
        seed: item_seed(settings.seed, &qap.id),
        n: settings.n,
    };
    match generate_distractors(&answer_tokens(source, &qap.answer_tokens), &article, &assets.view(), &cfg) {
        Ok(set) => {
            rec.partial = set.partial;
            rec.distractors = set.distractors;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistractStats {
    pub qaps: usize,
    pub complete: usize,
    pub partial: usize,
    pub failed: usize,
}

fn load_assets(cfg: &RunConfig) -> Result<Assets, AppError> {
    Ok(Assets::load(
        required("embeddings", &cfg.embeddings)?,
        required("lexicon", &cfg.lexicon)?,
        required("kb", &cfg.kb)?,
    )?)
}

pub fn cmd_distract(cfg: &RunConfig) -> Result<DistractStats, AppError> {
    let corpus = io::read_corpus(required("corpus", &cfg.corpus)?)?;
    let qaps: Vec<Qap> = io::read_jsonl(&cfg.out_dir.join("qaps.jsonl"))?;
    let assets = load_assets(cfg)?;
    let settings = DistractSettings::from_config(cfg);
    let records: Vec<DistractorRecord> = qaps.iter().map(|q| distract_qap(q, &corpus, &assets, settings)).collect();
    io::write_jsonl(&cfg.out_dir.join("distractors.jsonl"), &records)?;
    Ok(DistractStats {
        qaps: records.len(),
        complete: records.iter().filter(|r| r.error.is_none() && !r.partial).count(),
        partial: records.iter().filter(|r| r.error.is_none() && r.partial).count(),
        failed: records.iter().filter(|r| r.error.is_some()).count(),
    })
}

/// MCQs for the complete distractor sets; partial sets are left out.
pub fn assemble_records(records: &[DistractorRecord], seed: u64) -> Vec<Mcq> {
    records
        .iter()
        .filter(|r| r.error.is_none() && !r.partial)
        .map(|r| assemble_mcq(&r.qap_id, &r.question, &r.answer, &r.distractors, seed))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleStats {
    pub mcqs: usize,
    pub skipped: usize,
}

pub fn cmd_assemble(cfg: &RunConfig) -> Result<AssembleStats, AppError> {
    let records: Vec<DistractorRecord> = io::read_jsonl(&cfg.out_dir.join("distractors.jsonl"))?;
    let mcqs = assemble_records(&records, cfg.seed);
    io::write_jsonl(&cfg.out_dir.join("mcqs.jsonl"), &mcqs)?;
    Ok(AssembleStats {
        mcqs: mcqs.len(),
        skipped: records.len() - mcqs.len(),
    })
}

/// Runs the configured tagger over raw text and reads its tagged output.
pub fn run_tagger(command: &str, text: &str) -> Result<Vec<TaggedSentence>, AppError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| AppError::Data(format!("tagger {command:?}: {e}")))?;
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(text.as_bytes())
        .map_err(|e| AppError::Data(format!("tagger stdin: {e}")))?;
    let out = child
        .wait_with_output()
        .map_err(|e| AppError::Data(format!("tagger: {e}")))?;
    if !out.status.success() {
        return Err(AppError::Data(format!(
            "tagger exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let s: TaggedSentence =
                serde_json::from_str(l).map_err(|e| AppError::Data(format!("tagger output line {}: {e}", i + 1)))?;
            let v = metaqa_core::annotation::validate_sentence(&s);
            if v.is_empty() {
                Ok(s)
            } else {
                Err(AppError::Data(format!("tagger output {}: {}", s.id, v[0])))
            }
        })
        .collect()
}
