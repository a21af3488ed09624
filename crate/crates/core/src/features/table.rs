use std::io::{Read, Write};

use super::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::dataset::{BotCategory, LabelValue};
use crate::error::{Error, Result};

pub const FEATURE_CSV_HEADER: [&str; N_FEATURES + 3] = [
    "login",
    "f_login",
    "f_name",
    "f_bio",
    "f_email",
    "f_tag",
    "n_following",
    "n_followers",
    "n_activity",
    "n_issues",
    "n_pull_requests",
    "n_repositories",
    "n_commits",
    "n_active_days",
    "median_response_time",
    "n_connection_accounts",
    "comment_similarity",
    "periodicity",
    "label",
    "category",
];

/// One row of the feature export: an account, its features and an optional label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub login: String,
    pub features: FeatureVector,
    pub label: Option<LabelValue>,
    pub category: Option<BotCategory>,
}

fn real(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_feature_table<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FEATURE_CSV_HEADER)?;
    for r in rows {
        let f = &r.features;
        let mut rec: Vec<String> = vec![r.login.clone()];
        rec.extend(
            [f.f_login, f.f_name, f.f_bio, f.f_email, f.f_tag]
                .iter()
                .map(u8::to_string),
        );
        rec.extend(
            [
                f.n_following,
                f.n_followers,
                f.n_activity,
                f.n_issues,
                f.n_pull_requests,
                f.n_repositories,
                f.n_commits,
                f.n_active_days,
            ]
            .iter()
            .map(u64::to_string),
        );
        rec.push(real(f.median_response_time));
        rec.push(f.n_connection_accounts.to_string());
        rec.push(real(f.comment_similarity));
        rec.push(f.periodicity.to_string());
        rec.push(r.label.map(|l| l.as_u8().to_string()).unwrap_or_default());
        rec.push(r.category.map(|c| c.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize) -> &'a str {
    rec.get(i).unwrap_or("").trim()
}

fn parse_flag(s: &str, col: &str, line: u64) -> Result<u8> {
    match s {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(Error::format(format!("line {line}: {col} must be 0 or 1, got {s:?}"))),
    }
}

fn parse_count(s: &str, col: &str, line: u64) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::format(format!("line {line}: {col} must be a non-negative integer, got {s:?}")))
}

fn parse_real(s: &str, col: &str, line: u64) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::format(format!("line {line}: {col} must be a number, got {s:?}")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::format(format!("line {line}: {col} out of range: {v}")));
    }
    Ok(Some(v))
}

pub fn read_feature_table<R: Read>(reader: R) -> Result<Vec<FeatureRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(FEATURE_CSV_HEADER.iter().copied()) {
        return Err(Error::format(format!(
            "feature table header mismatch: expected {}",
            FEATURE_CSV_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let name = |i: usize| FEATURE_NAMES[i - 1];
        let flag = |i: usize| parse_flag(field(&rec, i), name(i), line);
        let count = |i: usize| parse_count(field(&rec, i), name(i), line);
        let features = FeatureVector {
            f_login: flag(1)?,
            f_name: flag(2)?,
            f_bio: flag(3)?,
            f_email: flag(4)?,
            f_tag: flag(5)?,
            n_following: count(6)?,
            n_followers: count(7)?,
            n_activity: count(8)?,
            n_issues: count(9)?,
            n_pull_requests: count(10)?,
            n_repositories: count(11)?,
            n_commits: count(12)?,
            n_active_days: count(13)?,
            median_response_time: parse_real(field(&rec, 14), name(14), line)?,
            n_connection_accounts: count(15)?,
            comment_similarity: parse_real(field(&rec, 16), name(16), line)?,
            periodicity: parse_real(field(&rec, 17), name(17), line)?.unwrap_or(0.0),
        };
        let label = match field(&rec, 18) {
            "" => None,
            s => Some(s.parse::<LabelValue>()?),
        };
        let category = match field(&rec, 19) {
            "" => None,
            s => Some(s.parse::<BotCategory>()?),
        };
        let login = field(&rec, 0).to_string();
        if login.is_empty() {
            return Err(Error::format(format!("line {line}: empty login")));
        }
        rows.push(FeatureRow {
            login,
            features,
            label,
            category,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureRow {
        FeatureRow {
            login: "scan-bot".into(),
            features: FeatureVector {
                f_login: 1,
                n_activity: 26,
                median_response_time: Some(2.5),
                comment_similarity: None,
                periodicity: 0.97,
                ..Default::default()
            },
            label: Some(LabelValue::Bot),
            category: Some(BotCategory::Scanning),
        }
    }

    #[test]
    fn header_and_missing_fields() {
        let mut buf = Vec::new();
        write_feature_table(&mut buf, &[sample()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), FEATURE_CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "scan-bot,1,0,0,0,0,0,0,26,0,0,0,0,0,2.5,0,,0.97,1,Scanning"
        );
        let back = read_feature_table(text.as_bytes()).unwrap();
        assert_eq!(back, vec![sample()]);
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_feature_table(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), FEATURE_CSV_HEADER.join(","));
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(read_feature_table("login,x\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_feature_table(&mut buf, &[sample()]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",1,0,0,0,0,", ",2,0,0,0,0,");
        assert!(read_feature_table(text.as_bytes()).is_err());
    }
}
