//! TREC-style run and qrels files.

use std::io::{BufRead, Write};

use super::metrics::{rank_order, Qrels, Run};
use crate::error::{Error, Result};

/// Writes `qid Q0 doc rank score tag` lines, ranked per query.
pub fn write_run<W: Write>(mut w: W, run: &Run<f64>, tag: &str) -> Result<()> {
    for (qid, docs) in run {
        let scores: Vec<f64> = docs.iter().map(|(_, s)| *s).collect();
        let ids: Vec<&str> = docs.iter().map(|(d, _)| d.as_str()).collect();
        for (rank, i) in rank_order(&scores, &ids).into_iter().enumerate() {
            writeln!(w, "{qid} Q0 {} {} {} {tag}", ids[i], rank + 1, scores[i])?;
        }
    }
    Ok(())
}

fn bad_line(n: usize, what: &str) -> Error {
    Error::validation(format!("line {n}: {what}"))
}

pub fn read_run<R: BufRead>(r: R) -> Result<Run<f64>> {
    let mut run = Run::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        if parts.len() != 6 {
            return Err(bad_line(n + 1, "expected 6 fields"));
        }
        let score: f64 = parts[4].parse().map_err(|_| bad_line(n + 1, "bad score"))?;
        run.entry(parts[0].to_string())
            .or_insert_with(Vec::new)
            .push((parts[2].to_string(), score));
    }
    Ok(run)
}

/// Writes `qid 0 doc 1` for every relevant document.
pub fn write_qrels<W: Write>(mut w: W, qrels: &Qrels) -> Result<()> {
    for (qid, docs) in qrels {
        for d in docs {
            writeln!(w, "{qid} 0 {d} 1")?;
        }
    }
    Ok(())
}

pub fn read_qrels<R: BufRead>(r: R) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        if parts.len() != 4 {
            return Err(bad_line(n + 1, "expected 4 fields"));
        }
        let rel: i64 = parts[3].parse().map_err(|_| bad_line(n + 1, "bad relevance"))?;
        let entry = qrels.entry(parts[0].to_string()).or_default();
        if rel > 0 {
            entry.insert(parts[2].to_string());
        }
    }
    Ok(qrels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut run = Run::new();
        run.insert("q1".to_string(), vec![("a".to_string(), 0.25), ("b".to_string(), 1.5)]);
        let mut buf = Vec::new();
        write_run(&mut buf, &run, "test").unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "q1 Q0 b 1 1.5 test\nq1 Q0 a 2 0.25 test\n");
        let back = read_run(&buf[..]).unwrap();
        assert_eq!(back["q1"], vec![("b".to_string(), 1.5), ("a".to_string(), 0.25)]);

        let mut qrels = Qrels::new();
        qrels.insert("q1".into(), ["b".to_string()].into());
        let mut buf = Vec::new();
        write_qrels(&mut buf, &qrels).unwrap();
        assert_eq!(read_qrels(&buf[..]).unwrap(), qrels);
        assert!(read_qrels(&b"q1 0 b\n"[..]).is_err());
    }
}
