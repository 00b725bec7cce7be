//! ISO-8601 instants stored as UTC seconds.

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};

pub const DAY: i64 = 86_400;

/// Parses RFC 3339 (`2014-01-28T21:00:00Z`, with any offset), a naive
/// date-time taken as UTC, or a bare date at midnight UTC.
pub fn parse(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format(secs: i64) -> String {
    DateTime::<Utc>::from_timestamp(secs, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| secs.to_string())
}

/// Serde adapter writing seconds as ISO-8601 strings.
pub mod iso {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(secs: &i64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(*secs))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).ok_or_else(|| de::Error::custom(format!("invalid timestamp {raw:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_common_forms() {
        let z = parse("2014-01-28T21:00:00Z").unwrap();
        assert_eq!(parse("2014-01-28T16:00:00-05:00"), Some(z));
        assert_eq!(parse("2014-01-28T21:00:00"), Some(z));
        assert_eq!(parse("2014-01-28"), Some(z - 21 * 3600));
        assert_eq!(format(z), "2014-01-28T21:00:00Z");
        assert_eq!(parse("yesterday"), None);
    }
}
