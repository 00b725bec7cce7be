//! Transcripts, articles, and outlets loaded from line-delimited records.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{read_records, required};
use crate::timestamp;
use crate::tokenize::Tokenizer;

/// Self-declared or externally suspected political slant of an outlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "dC")]
    DeclaredConservative,
    #[serde(rename = "sC")]
    SuspectedConservative,
    #[serde(rename = "sL")]
    SuspectedLiberal,
    #[serde(rename = "dL")]
    DeclaredLiberal,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

impl Label {
    pub const LABELED: [Label; 4] = [
        Label::DeclaredConservative,
        Label::SuspectedConservative,
        Label::SuspectedLiberal,
        Label::DeclaredLiberal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::DeclaredConservative => "dC",
            Label::SuspectedConservative => "sC",
            Label::SuspectedLiberal => "sL",
            Label::DeclaredLiberal => "dL",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dC" => Label::DeclaredConservative,
            "sC" => Label::SuspectedConservative,
            "sL" => Label::SuspectedLiberal,
            "dL" => Label::DeclaredLiberal,
            "unlabeled" => Label::Unlabeled,
            other => {
                return Err(Error::InvalidParameter(format!("unknown outlet label {other:?}")))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outlet {
    pub id: String,
    pub domain: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet_id: String,
    #[serde(with = "timestamp::iso")]
    pub timestamp: i64,
    pub title: String,
    pub url: String,
    pub body: String,
}

impl Article {
    pub fn mentions(&self, keyword: &str) -> bool {
        self.body.contains(keyword) || self.title.contains(keyword)
    }
}

/// One speaker turn. Turns excluded by the speaker filter keep an empty
/// token range positioned where they occur.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub speaker: String,
    pub text: String,
    pub tokens: Range<usize>,
    pub indexed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub id: String,
    pub timestamp: i64,
    pub segments: Vec<Segment>,
    /// Tokens of all indexed segments, concatenated in order.
    pub tokens: Vec<String>,
}

impl Transcript {
    pub fn new(
        id: impl Into<String>,
        timestamp: i64,
        turns: Vec<(String, String)>,
        speaker_filter: Option<&str>,
        tok: &Tokenizer,
    ) -> Self {
        let mut tokens = Vec::new();
        let segments = turns
            .into_iter()
            .map(|(speaker, text)| {
                let indexed = speaker_filter.is_none_or(|f| speaker.trim() == f);
                let start = tokens.len();
                if indexed {
                    tokens.extend(tok.tokenize(&text));
                }
                Segment {
                    speaker,
                    text,
                    tokens: start..tokens.len(),
                    indexed,
                }
            })
            .collect();
        Transcript {
            id: id.into(),
            timestamp,
            segments,
            tokens,
        }
    }

    pub fn to_record(&self) -> TranscriptRecord {
        TranscriptRecord {
            id: self.id.clone(),
            timestamp: timestamp::format(self.timestamp),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentRecord {
                    speaker: s.speaker.clone(),
                    text: s.text.clone(),
                })
                .collect(),
        }
    }
}

/// On-disk transcript form: `{id, timestamp, segments: [{speaker, text}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: String,
    pub timestamp: String,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub speaker: String,
    pub text: String,
}

#[derive(Deserialize)]
struct RawTranscript {
    id: Option<String>,
    timestamp: Option<String>,
    segments: Option<Vec<RawSegment>>,
}

#[derive(Deserialize)]
struct RawSegment {
    speaker: Option<String>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct RawArticle {
    id: Option<String>,
    outlet_id: Option<String>,
    timestamp: Option<String>,
    title: Option<String>,
    url: Option<String>,
    body: Option<String>,
}

#[derive(Deserialize)]
struct RawOutlet {
    id: Option<String>,
    domain: Option<String>,
    label: Option<String>,
}

fn parse_time(raw: &str, line: usize) -> Result<i64> {
    timestamp::parse(raw).ok_or_else(|| Error::Malformed {
        line,
        message: format!("invalid timestamp {raw:?}"),
    })
}

/// Loads transcripts sorted by (timestamp, id). With a speaker filter, only
/// turns whose speaker equals the filter are tokenized.
pub fn load_transcripts(
    path: &Path,
    speaker_filter: Option<&str>,
    tok: &Tokenizer,
) -> Result<Vec<Transcript>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in read_records::<RawTranscript>(path)? {
        let id = required(raw.id, "id", line)?;
        let ts = parse_time(&required(raw.timestamp, "timestamp", line)?, line)?;
        let mut turns = Vec::new();
        for seg in required(raw.segments, "segments", line)? {
            turns.push((
                required(seg.speaker, "speaker", line)?,
                required(seg.text, "text", line)?,
            ));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                kind: "transcript",
                id,
            });
        }
        out.push(Transcript::new(id, ts, turns, speaker_filter, tok));
    }
    out.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    Ok(out)
}

pub fn load_outlets(path: &Path) -> Result<Vec<Outlet>> {
    let mut ids = HashSet::new();
    let mut domains = HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in read_records::<RawOutlet>(path)? {
        let id = required(raw.id, "id", line)?;
        let domain = required(raw.domain, "domain", line)?;
        let label = required(raw.label, "label", line)?
            .parse::<Label>()
            .map_err(|e| Error::Malformed {
                line,
                message: e.to_string(),
            })?;
        if domain.trim().is_empty() {
            return Err(Error::Malformed {
                line,
                message: "empty domain".into(),
            });
        }
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId { kind: "outlet", id });
        }
        if !domains.insert(domain.clone()) {
            return Err(Error::DuplicateId {
                kind: "outlet domain",
                id: domain,
            });
        }
        out.push(Outlet { id, domain, label });
    }
    Ok(out)
}

/// Loads articles sorted by (timestamp, id). With a keyword filter, articles
/// whose title and body both lack the keyword (case-sensitive) are dropped.
pub fn load_articles(
    path: &Path,
    outlets: &[Outlet],
    keyword_filter: Option<&str>,
) -> Result<Vec<Article>> {
    let known: HashSet<&str> = outlets.iter().map(|o| o.id.as_str()).collect();
    let mut unknown = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in read_records::<RawArticle>(path)? {
        let id = required(raw.id, "id", line)?;
        let outlet_id = required(raw.outlet_id, "outlet_id", line)?;
        let ts = parse_time(&required(raw.timestamp, "timestamp", line)?, line)?;
        let title = required(raw.title, "title", line)?;
        let url = required(raw.url, "url", line)?;
        let body = required(raw.body, "body", line)?;
        if body.trim().is_empty() {
            return Err(Error::Malformed {
                line,
                message: "empty body".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId { kind: "article", id });
        }
        if !known.contains(outlet_id.as_str()) {
            unknown.insert(outlet_id.clone());
        }
        out.push(Article {
            id,
            outlet_id,
            timestamp: ts,
            title,
            url,
            body,
        });
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownOutlets(unknown.into_iter().collect()));
    }
    if let Some(k) = keyword_filter {
        out.retain(|a| a.mentions(k));
    }
    out.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    Ok(out)
}

/// Outlet id → position lookup.
pub fn outlet_index(outlets: &[Outlet]) -> HashMap<&str, usize> {
    outlets
        .iter()
        .enumerate()
        .map(|(i, o)| (o.id.as_str(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::write_records;
    use std::io::Write;

    fn file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    fn outlets() -> Vec<Outlet> {
        vec![Outlet {
            id: "o1".into(),
            domain: "one.example".into(),
            label: Label::Unlabeled,
        }]
    }

    #[test]
    fn speaker_filter_keeps_gaps() {
        let f = file(&[
            r#"{"id":"t2","timestamp":"2014-01-02T00:00:00Z","segments":[{"speaker":"OBAMA","text":"Yes we can."},{"speaker":"AUDIENCE","text":"Four more years!"}]}"#,
            r#"{"id":"t1","timestamp":"2014-01-01T00:00:00Z","segments":[{"speaker":"AUDIENCE","text":"Hello there."},{"speaker":"OBAMA","text":"Thank you all."}]}"#,
        ]);
        let ts = load_transcripts(f.path(), Some("OBAMA"), &Tokenizer::default()).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].id, "t1");
        assert_eq!(ts[1].tokens, ["yes", "we", "can"]);
        assert_eq!(ts[1].segments[1].tokens, 3..3);
        assert!(!ts[1].segments[1].indexed);
        assert_eq!(ts[0].segments[0].tokens, 0..0);
        assert_eq!(ts[0].segments[1].tokens, 0..3);
    }

    #[test]
    fn empty_file_and_missing_fields() {
        let f = file(&[]);
        assert!(load_transcripts(f.path(), None, &Tokenizer::default())
            .unwrap()
            .is_empty());
        let f = file(&["", r#"{"id":"t1","segments":[]}"#]);
        let err = load_transcripts(f.path(), None, &Tokenizer::default()).unwrap_err();
        assert_eq!(err.to_string(), "missing field timestamp at line 2");
    }

    #[test]
    fn duplicate_transcript_id() {
        let rec = r#"{"id":"t1","timestamp":"2014-01-01","segments":[]}"#;
        let f = file(&[rec, rec]);
        assert!(matches!(
            load_transcripts(f.path(), None, &Tokenizer::default()),
            Err(Error::DuplicateId { .. })
        ));
    }

    fn article(id: &str, outlet: &str, body: &str) -> String {
        format!(
            r#"{{"id":"{id}","outlet_id":"{outlet}","timestamp":"2014-01-0{}T00:00:00Z","title":"t","url":"u","body":"{body}"}}"#,
            id.len()
        )
    }

    #[test]
    fn keyword_filter() {
        let f = file(&[
            &article("a1", "o1", "Obama spoke."),
            &article("a22", "o1", "Nothing here."),
            &article("a333", "o1", "Later, Obama left."),
        ]);
        let kept = load_articles(f.path(), &outlets(), Some("Obama")).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(load_articles(f.path(), &outlets(), None).unwrap().len(), 3);
        assert!(load_articles(f.path(), &outlets(), Some("obama"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_outlet_is_listed() {
        let f = file(&[&article("a1", "zz", "x"), &article("a22", "o1", "y")]);
        let err = load_articles(f.path(), &outlets(), None).unwrap_err();
        assert!(matches!(&err, Error::UnknownOutlets(ids) if ids == &["zz"]));
    }

    #[test]
    fn outlet_validation() {
        let f = file(&[
            r#"{"id":"a","domain":"x.example","label":"dC"}"#,
            r#"{"id":"b","domain":"x.example","label":"sL"}"#,
        ]);
        assert!(matches!(load_outlets(f.path()), Err(Error::DuplicateId { .. })));
        let f = file(&[r#"{"id":"a","domain":"x.example","label":"left"}"#]);
        assert!(matches!(load_outlets(f.path()), Err(Error::Malformed { line: 1, .. })));
    }

    #[test]
    fn transcript_round_trip() {
        let tok = Tokenizer::default();
        let t = Transcript::new(
            "t1",
            1_390_000_000,
            vec![
                ("OBAMA".into(), "It's time.".into()),
                ("Q".into(), "Why?".into()),
                ("OBAMA".into(), "Because we can't wait.".into()),
            ],
            Some("OBAMA"),
            &tok,
        );
        let f = tempfile::NamedTempFile::new().unwrap();
        write_records(f.path(), &[t.to_record()]).unwrap();
        let back = load_transcripts(f.path(), Some("OBAMA"), &tok).unwrap();
        assert_eq!(back, vec![t]);
    }
}
