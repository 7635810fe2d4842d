use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Result of one command, rendered either as `key=value` lines or as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub seed: Option<u64>,
    pub status: Status,
    pub entries: Vec<(String, String)>,
    /// Free-form output (DOT text, state dumps) printed verbatim.
    pub body: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

impl RunReport {
    pub fn new(command: String, seed: Option<u64>) -> Self {
        RunReport {
            schema: SCHEMA,
            command,
            seed,
            status: Status::Ok,
            entries: Vec::new(),
            body: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn line(&mut self, line: impl Into<String>) {
        self.body.push(line.into());
    }

    pub fn fail(&mut self) {
        self.status = Status::Failed;
    }

    /// Body-only reports print nothing but their body.
    pub fn is_raw(&self) -> bool {
        self.entries.is_empty() && !self.body.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.is_raw() {
            for l in &self.body {
                out.push_str(l);
                out.push('\n');
            }
            return out;
        }
        out.push_str(&format!("schema={}\n", self.schema));
        out.push_str(&format!("command={}\n", self.command));
        match self.seed {
            Some(s) => out.push_str(&format!("seed={s}\n")),
            None => out.push_str("seed=none\n"),
        }
        for (k, v) in &self.entries {
            out.push_str(&format!("{k}={v}\n"));
        }
        for l in &self.body {
            out.push_str(&format!("line={l}\n"));
        }
        let status = match self.status {
            Status::Ok => "ok",
            Status::Failed => "failed",
        };
        out.push_str(&format!("status={status}\n"));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Fixed nine-digit rendering without negative zero.
pub fn real(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}
