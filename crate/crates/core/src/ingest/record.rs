use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifies the original post a retweet points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RetweetRef {
    pub tweet_id: String,
    pub author_id: String,
}

/// One tweet event as read from the line-delimited corpus.
///
/// Optional fields that are missing from the input stay `None`; nothing is
/// defaulted. `is_original` is derived and never serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    /// UTC epoch seconds.
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<RetweetRef>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follower_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_lang: Option<String>,
    /// Tweet text, only needed by the live toxicity scorer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl AsRef<TweetRecord> for TweetRecord {
    fn as_ref(&self) -> &TweetRecord {
        self
    }
}

impl TweetRecord {
    pub fn is_original(&self) -> bool {
        self.retweet_of.is_none()
    }

    pub fn is_english(&self) -> bool {
        self.text_lang.as_deref().is_some_and(|l| {
            let l = l.to_ascii_lowercase();
            l == "en" || l.starts_with("en-")
        })
    }

    /// Checks the record-level invariants.
    pub fn validate(&self) -> Result<(), String> {
        if self.tweet_id.is_empty() {
            return Err("empty tweet_id".into());
        }
        if self.author_id.is_empty() {
            return Err("empty author_id".into());
        }
        if self.timestamp <= 0 {
            return Err(format!("timestamp {} is not positive", self.timestamp));
        }
        for (name, v) in [("bot_score", self.bot_score), ("toxicity", self.toxicity)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("{name} {v} outside [0, 1]"));
                }
            }
        }
        if let Some(rt) = &self.retweet_of {
            if rt.tweet_id == self.tweet_id {
                return Err("retweet_of references the record itself".into());
            }
            if rt.tweet_id.is_empty() || rt.author_id.is_empty() {
                return Err("retweet_of has an empty id".into());
            }
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("TweetRecord always serializes")
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: invalid record: {reason}")]
    Invalid { line: usize, reason: String },
}

impl RecordError {
    pub fn line(&self) -> usize {
        match self {
            RecordError::Malformed { line, .. } | RecordError::Invalid { line, .. } => *line,
        }
    }
}

/// Parses and validates one corpus line. `line_no` is 1-based and only used
/// for error reporting.
pub fn parse_record(text: &str, line_no: usize) -> Result<TweetRecord, RecordError> {
    let record: TweetRecord = serde_json::from_str(text.trim_end_matches(['\r', '\n']))
        .map_err(|source| RecordError::Malformed { line: line_no, source })?;
    record
        .validate()
        .map_err(|reason| RecordError::Invalid { line: line_no, reason })?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RT: &str = r#"{"tweet_id":"t2","author_id":"b","timestamp":1580000000,"retweet_of":{"tweet_id":"t1","author_id":"a"},"urls":["http://breaking911.com/x"],"follower_count":10}"#;

    #[test]
    fn retweet_is_not_original() {
        let r = parse_record(RT, 1).unwrap();
        assert!(!r.is_original());
        assert_eq!(r.retweet_of.as_ref().unwrap().author_id, "a");
        assert_eq!(r.bot_score, None);
        assert_eq!(r.text_lang, None);
    }

    #[test]
    fn original_without_optional_fields() {
        let r = parse_record(r#"{"tweet_id":"t1","author_id":"a","timestamp":5}"#, 1).unwrap();
        assert!(r.is_original());
        assert!(r.urls.is_empty());
        assert_eq!(r.follower_count, None);
    }

    #[test]
    fn bot_score_out_of_range_is_rejected() {
        let line = r#"{"tweet_id":"t1","author_id":"a","timestamp":5,"bot_score":1.5}"#;
        match parse_record(line, 7) {
            Err(RecordError::Invalid { line, reason }) => {
                assert_eq!(line, 7);
                assert!(reason.contains("bot_score"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_record("{not json", 42).unwrap_err();
        assert!(matches!(err, RecordError::Malformed { line: 42, .. }));
        assert_eq!(err.line(), 42);
    }

    #[test]
    fn non_positive_timestamp_and_self_reference() {
        assert!(parse_record(r#"{"tweet_id":"t","author_id":"a","timestamp":0}"#, 1).is_err());
        let own = r#"{"tweet_id":"t","author_id":"a","timestamp":3,"retweet_of":{"tweet_id":"t","author_id":"b"}}"#;
        assert!(parse_record(own, 1).is_err());
    }

    #[test]
    fn english_tag_detection() {
        let mut r = parse_record(r#"{"tweet_id":"t","author_id":"a","timestamp":3}"#, 1).unwrap();
        assert!(!r.is_english());
        r.text_lang = Some("en-GB".into());
        assert!(r.is_english());
        r.text_lang = Some("es".into());
        assert!(!r.is_english());
    }
}
