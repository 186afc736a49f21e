//! Batch files: one `n a b c` instance per line, `#` starts a comment.

use antihankel::HankelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchLine {
    /// 1-based line number in the file.
    pub line: usize,
    pub params: HankelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchError {
    pub line: usize,
    pub message: String,
}

pub fn parse_batch(text: &str) -> Result<Vec<BatchLine>, BatchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let err = |message: String| BatchError { line, message };
        let [n, a, b, c] = fields[..] else {
            return Err(err(format!("expected `n a b c`, found {} fields", fields.len())));
        };
        let n: usize = n.parse().map_err(|e| err(format!("bad n `{n}`: {e}")))?;
        let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad coefficient `{s}`: {e}")));
        let params = HankelParams::new(n, real(a)?, real(b)?, real(c)?).map_err(|e| err(e.to_string()))?;
        out.push(BatchLine { line, params });
    }
    Ok(out)
}
