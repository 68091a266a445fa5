use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Parameter { key: Option<String>, message: String },
    #[error(transparent)]
    Core(#[from] atomsqueeze::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'static str,
    code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    key: Option<&'a str>,
    message: String,
}

impl CliError {
    pub fn param(key: &str, message: impl Into<String>) -> Self {
        CliError::Parameter {
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn param_unkeyed(message: impl Into<String>) -> Self {
        CliError::Parameter {
            key: None,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Parameter { key, .. } => key.as_deref(),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        use atomsqueeze::Error as E;
        match self {
            CliError::Parameter { .. } | CliError::Core(E::InvalidParameter(_)) => "parameter",
            CliError::Core(E::NotSupported(_)) => "not-supported",
            CliError::Core(E::InvalidState(_)) => "invalid-state",
            CliError::Core(E::DegenerateData(_)) => "degenerate-data",
            CliError::Core(E::NumericFailure(_)) => "numeric",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "parameter" | "not-supported" => 2,
            "io" => 4,
            _ => 3,
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        let d = Diagnostic {
            error: self.kind(),
            code: self.exit_code(),
            key: self.key(),
            message: self.to_string().replace('\n', " "),
        };
        serde_json::to_string(&d).expect("diagnostic serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::param("beta", "x").exit_code(), 2);
        assert_eq!(
            CliError::from(atomsqueeze::Error::NotSupported("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(atomsqueeze::Error::InvalidState("x".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::from(atomsqueeze::Error::NumericFailure("x".into())).exit_code(),
            3
        );
        let io = CliError::io(Path::new("/x"), std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 4);
    }

    #[test]
    fn diagnostic_is_single_line_json() {
        let d = CliError::param("beta", "bad\nvalue").diagnostic();
        assert!(!d.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&d).unwrap();
        assert_eq!(v["key"], "beta");
        assert_eq!(v["code"], 2);
    }
}
