use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use crate::error::{CalexError, Result};
use crate::model::ScoringModel;

/// Number of requests written before draining their responses; bounds the
/// amount of unread data in the pipe while still amortizing round trips.
const PIPELINE_CHUNK: usize = 64;

/// Where an external scorer lives: a shell command spoken to over
/// stdin/stdout, or a TCP endpoint (`tcp:host:port`).
#[derive(Debug, Clone, PartialEq)]
pub enum ScorerSpec {
    Command(String),
    Tcp(String),
}

impl ScorerSpec {
    /// `tcp:host:port` selects a socket; anything else is a shell command.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some(addr) = spec.strip_prefix("tcp:") {
            if addr.rsplit_once(':').is_none() {
                return Err(CalexError::config(format!(
                    "tcp scorer spec needs host:port, got '{addr}'"
                )));
            }
            Ok(ScorerSpec::Tcp(addr.to_string()))
        } else if spec.trim().is_empty() {
            Err(CalexError::config("empty scorer spec".to_string()))
        } else {
            Ok(ScorerSpec::Command(spec.to_string()))
        }
    }
}

impl std::fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScorerSpec::Command(cmd) => write!(f, "{cmd}"),
            ScorerSpec::Tcp(addr) => write!(f, "tcp:{addr}"),
        }
    }
}

/// A scoring model served by another process over newline-delimited JSON.
///
/// Requests are `{"id":<uint>,"x":[<numbers>...]}`, one per line; responses
/// are `{"id":<uint>,"score":<real>}` and may arrive out of order — they
/// are reassembled by id. Scores outside [0,1] are clipped with a warning.
/// All traffic for one handle is serialized behind a mutex; open several
/// handles for parallel batches.
pub struct ExternalScorer {
    inner: Mutex<Inner>,
    kind: String,
    timeout: Duration,
}

struct Inner {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    next_id: u64,
}

impl Drop for Inner {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            // Closing our write end (dropped with `writer`) lets the scorer
            // exit on EOF; kill covers scorers that ignore it.
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl ExternalScorer {
    /// Spawns the child process or connects the socket and starts the
    /// reader thread. The timeout applies per awaited response line.
    pub fn connect(spec: &ScorerSpec, timeout: Duration) -> Result<Self> {
        let kind = format!("external:{spec}");
        let (writer, reader, child): (Box<dyn Write + Send>, Box<dyn Read + Send>, Option<Child>) =
            match spec {
                ScorerSpec::Command(cmd) => {
                    let mut child = Command::new("sh")
                        .arg("-c")
                        .arg(cmd)
                        .stdin(Stdio::piped())
                        .stdout(Stdio::piped())
                        .spawn()
                        .map_err(|e| {
                            CalexError::Scorer(format!("cannot spawn scorer '{cmd}': {e}"))
                        })?;
                    let stdin = child.stdin.take().expect("piped stdin");
                    let stdout = child.stdout.take().expect("piped stdout");
                    (Box::new(stdin), Box::new(stdout), Some(child))
                }
                ScorerSpec::Tcp(addr) => {
                    let stream = TcpStream::connect(addr).map_err(|e| {
                        CalexError::Scorer(format!("cannot connect to scorer at {addr}: {e}"))
                    })?;
                    stream.set_nodelay(true).ok();
                    let reader = stream.try_clone().map_err(|e| {
                        CalexError::Scorer(format!("cannot clone scorer socket: {e}"))
                    })?;
                    (Box::new(stream), Box::new(reader), None)
                }
            };

        let (tx, rx) = mpsc::channel();
        std::thread::Builder::new()
            .name("calex-scorer-reader".to_string())
            .spawn(move || {
                let mut reader = BufReader::new(reader);
                loop {
                    let mut line = String::new();
                    match reader.read_line(&mut line) {
                        Ok(0) => break,
                        Ok(_) => {
                            if tx.send(Ok(line)).is_err() {
                                break;
                            }
                        }
                        Err(e) => {
                            let _ = tx.send(Err(e));
                            break;
                        }
                    }
                }
            })
            .map_err(|e| CalexError::Scorer(format!("cannot start reader thread: {e}")))?;

        Ok(ExternalScorer {
            inner: Mutex::new(Inner { writer, lines: rx, child, next_id: 0 }),
            kind,
            timeout,
        })
    }

    fn batch(&self, instances: &[Vec<f64>]) -> Result<Vec<f64>> {
        if instances.is_empty() {
            return Ok(Vec::new());
        }
        let mut inner = self.inner.lock().map_err(|_| {
            CalexError::Scorer("scorer handle poisoned by an earlier panic".to_string())
        })?;
        let base = inner.next_id;
        inner.next_id += instances.len() as u64;

        let mut scores: HashMap<u64, f64> = HashMap::with_capacity(instances.len());
        for (start, chunk) in (0..).zip(instances.chunks(PIPELINE_CHUNK)) {
            let chunk_base = base + (start * PIPELINE_CHUNK) as u64;
            for (offset, x) in chunk.iter().enumerate() {
                let request = serde_json::json!({"id": chunk_base + offset as u64, "x": x});
                let mut line = serde_json::to_string(&request)
                    .map_err(|e| CalexError::Scorer(format!("cannot encode request: {e}")))?;
                line.push('\n');
                inner.writer.write_all(line.as_bytes()).map_err(|e| {
                    CalexError::Scorer(format!(
                        "cannot write request id {}: {e}",
                        chunk_base + offset as u64
                    ))
                })?;
            }
            inner.writer.flush().map_err(|e| {
                CalexError::Scorer(format!("cannot flush requests at id {chunk_base}: {e}"))
            })?;

            for _ in 0..chunk.len() {
                let awaiting = (base..base + instances.len() as u64)
                    .find(|id| !scores.contains_key(id))
                    .expect("fewer responses than requests outstanding");
                let line = match inner.lines.recv_timeout(self.timeout) {
                    Ok(Ok(line)) => line,
                    Ok(Err(e)) => {
                        return Err(CalexError::Scorer(format!(
                            "read failed while awaiting response to request id {awaiting}: {e}"
                        )))
                    }
                    Err(RecvTimeoutError::Timeout) => {
                        return Err(CalexError::Scorer(format!(
                            "timed out after {:?} awaiting response to request id {awaiting}",
                            self.timeout
                        )))
                    }
                    Err(RecvTimeoutError::Disconnected) => {
                        return Err(CalexError::Scorer(format!(
                            "scorer closed the stream while request id {awaiting} was pending"
                        )))
                    }
                };
                let (id, score) = parse_response(&line, awaiting)?;
                if id < base || id >= base + instances.len() as u64 {
                    return Err(CalexError::Scorer(format!(
                        "response id {id} does not match any outstanding request \
                         (awaiting id {awaiting})"
                    )));
                }
                if scores.contains_key(&id) {
                    return Err(CalexError::Scorer(format!("duplicate response for request id {id}")));
                }
                let clipped = score.clamp(0.0, 1.0);
                if clipped != score {
                    log::warn!("scorer returned {score} for request id {id}; clipping to {clipped}");
                }
                scores.insert(id, clipped);
            }
        }

        Ok((base..base + instances.len() as u64)
            .map(|id| scores[&id])
            .collect())
    }
}

fn parse_response(line: &str, awaiting: u64) -> Result<(u64, f64)> {
    let malformed = |why: &str| {
        CalexError::Scorer(format!(
            "malformed response while awaiting request id {awaiting} ({why}): {}",
            line.trim_end()
        ))
    };
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|_| malformed("not valid JSON"))?;
    let id = value
        .get("id")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| malformed("missing unsigned 'id'"))?;
    let score = value
        .get("score")
        .and_then(|v| v.as_f64())
        .ok_or_else(|| malformed("missing numeric 'score'"))?;
    if !score.is_finite() {
        return Err(malformed("non-finite score"));
    }
    Ok((id, score))
}

impl ScoringModel for ExternalScorer {
    fn score(&self, instance: &[f64]) -> Result<f64> {
        Ok(self.batch(&[instance.to_vec()])?[0])
    }

    fn score_batch(&self, instances: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.batch(instances)
    }

    fn kind(&self) -> String {
        self.kind.clone()
    }

    /// External models arrive pre-trained; the count is unknown.
    fn trained_on(&self) -> usize {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A scorer that answers every request with a fixed score. The id is
    /// sliced out of our canonical request line with shell expansions.
    fn echo_scorer(score: &str) -> String {
        format!(
            r#"while IFS= read -r line; do id="${{line#*:}}"; id="${{id%%,*}}"; printf '{{"id":%s,"score":{score}}}\n' "$id"; done"#
        )
    }

    fn connect(cmd: &str) -> ExternalScorer {
        ExternalScorer::connect(&ScorerSpec::Command(cmd.to_string()), Duration::from_secs(5))
            .unwrap()
    }

    #[test]
    fn parses_spec_forms() {
        assert_eq!(
            ScorerSpec::parse("tcp:127.0.0.1:9000").unwrap(),
            ScorerSpec::Tcp("127.0.0.1:9000".to_string())
        );
        assert_eq!(
            ScorerSpec::parse("./scorer.sh --flag").unwrap(),
            ScorerSpec::Command("./scorer.sh --flag".to_string())
        );
        assert!(ScorerSpec::parse("tcp:nohost").is_err());
        assert!(ScorerSpec::parse("  ").is_err());
    }

    #[test]
    fn scores_echo_protocol() {
        let scorer = connect(&echo_scorer("0.25"));
        let scores = scorer
            .score_batch(&[vec![1.0, 0.0], vec![0.5, 2.0], vec![3.0, 3.0]])
            .unwrap();
        assert_eq!(scores, vec![0.25, 0.25, 0.25]);
        assert_eq!(scorer.score(&[9.0]).unwrap(), 0.25);
        assert_eq!(scorer.kind(), format!("external:{}", echo_scorer("0.25")));
    }

    #[test]
    fn clips_out_of_range_scores() {
        let scorer = connect(&echo_scorer("1.3"));
        assert_eq!(scorer.score(&[0.0]).unwrap(), 1.0);
        let scorer = connect(&echo_scorer("-0.5"));
        assert_eq!(scorer.score(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn reassembles_out_of_order_responses() {
        // Reads two requests, then answers them in reverse order.
        let cmd = r#"read -r a; read -r b; ida="${a#*:}"; ida="${ida%%,*}"; idb="${b#*:}"; idb="${idb%%,*}"; printf '{"id":%s,"score":0.9}\n' "$idb"; printf '{"id":%s,"score":0.1}\n' "$ida""#;
        let scorer = connect(cmd);
        let scores = scorer.score_batch(&[vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(scores, vec![0.1, 0.9], "scores must follow request order");
    }

    #[test]
    fn unknown_id_is_an_error() {
        let cmd = r#"read -r line; printf '{"id":9999,"score":0.5}\n'"#;
        let scorer = connect(cmd);
        let err = scorer.score(&[1.0]).unwrap_err().to_string();
        assert!(err.contains("9999"), "{err}");
    }

    #[test]
    fn malformed_line_is_an_error() {
        let cmd = r#"read -r line; echo "not json""#;
        let scorer = connect(cmd);
        let err = scorer.score(&[1.0]).unwrap_err().to_string();
        assert!(err.contains("malformed") && err.contains("request id 0"), "{err}");
    }

    #[test]
    fn timeout_names_the_pending_request() {
        let scorer = ExternalScorer::connect(
            &ScorerSpec::Command("sleep 30".to_string()),
            Duration::from_millis(200),
        )
        .unwrap();
        let err = scorer.score(&[1.0]).unwrap_err().to_string();
        assert!(err.contains("timed out") && err.contains("request id 0"), "{err}");
    }

    #[test]
    fn tcp_scorer_round_trips() {
        use std::io::Write as _;
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut out = stream;
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 0 {
                let v: serde_json::Value = serde_json::from_str(&line).unwrap();
                let id = v["id"].as_u64().unwrap();
                let x0 = v["x"][0].as_f64().unwrap();
                writeln!(out, r#"{{"id":{id},"score":{}}}"#, x0 / 10.0).unwrap();
                line.clear();
            }
        });
        let scorer = ExternalScorer::connect(
            &ScorerSpec::parse(&format!("tcp:{addr}")).unwrap(),
            Duration::from_secs(5),
        )
        .unwrap();
        let scores = scorer.score_batch(&[vec![1.0], vec![5.0], vec![9.0]]).unwrap();
        assert_eq!(scores, vec![0.1, 0.5, 0.9]);
        drop(scorer);
        server.join().unwrap();
    }
}
