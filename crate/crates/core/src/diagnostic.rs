//! Diagnostic codes, severities and the error-class mapping.
//!
//! `SYN` codes come from the lexer and parsers, `SEM` codes from semantic
//! checks. Every code has a fixed severity and a default fix hint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

macro_rules! catalogue {
    ($($variant:ident => $text:literal, $sev:ident, $hint:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Code {
            $($variant,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$variant => $text,)*
                }
            }

            pub fn severity(self) -> Severity {
                match self {
                    $(Code::$variant => Severity::$sev,)*
                }
            }

            pub fn default_hint(self) -> &'static str {
                match self {
                    $(Code::$variant => $hint,)*
                }
            }
        }

        impl FromStr for Code {
            type Err = UnknownCode;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Code::$variant),)*
                    other => Err(UnknownCode(other.to_string())),
                }
            }
        }
    };
}

catalogue! {
    Syn001 => "SYN001", Error, "write an identifier (letters, digits, underscore; starting with a letter) here";
    Syn002 => "SYN002", Error, "insert the missing token";
    Syn003 => "SYN003", Error, "remove this token or start a statement with `concept`, `decision concept`, an edge, or `constraint`";
    Syn004 => "SYN004", Error, "close every open block and parenthesis";
    Syn005 => "SYN005", Error, "remove the character; only ASCII identifiers and the documented operators are allowed";
    Syn006 => "SYN006", Error, "remove everything after the closing `}` of the graph";
    Syn007 => "SYN007", Error, "use a non-negative integer count";
    Syn008 => "SYN008", Error, "write each concept as `- name (input)` or `- name (decision): label, label`";
    Sem001 => "SEM001", Error, "declare the concept first or use one of the declared names";
    Sem002 => "SEM002", Error, "add an `is_a` edge from the decision concept to the input concept it labels";
    Sem003 => "SEM003", Error, "remove one `is_a` edge so the parent chain has no cycle";
    Sem004 => "SEM004", Error, "remove one `contains` edge so the containment hierarchy has no cycle";
    Sem005 => "SEM005", Error, "give the `has_a` relation at least two roles with distinct names";
    Sem006 => "SEM006", Error, "apply concept predicates to one variable and role predicates to two";
    Sem007 => "SEM007", Error, "bind the variable with an enclosing `forall` or `exists`";
    Sem008 => "SEM008", Error, "lower the count or list more alternatives";
    Sem009 => "SEM009", Warning, "only make labels mutually exclusive when they attach to the same input concept";
    Sem010 => "SEM010", Warning, "connect the concept to the rest of the graph or remove it";
    Sem011 => "SEM011", Warning, "delete the repeated edge";
    Sem012 => "SEM012", Error, "rewrite the formula using concept predicates, connectives, quantifiers and counting only";
    Sem013 => "SEM013", Error, "remove the repeated declaration or rename one of the concepts";
    Sem014 => "SEM014", Warning, "attach the decision concept closer to its input concept";
    Sem015 => "SEM015", Error, "give label sets only to decision concepts and list at least two distinct labels";
    Sem016 => "SEM016", Warning, "replace `etc` with the complete list of labels";
}

impl Code {
    pub fn class(self) -> ErrorClass {
        if self.as_str().starts_with("SYN") {
            ErrorClass::Exec
        } else {
            ErrorClass::Symbolic
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown diagnostic code `{0}`")]
pub struct UnknownCode(pub String);

/// Which feedback channel a diagnostic belongs to: failures a host runtime
/// would raise while loading the code, or problems only the symbolic checker
/// finds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Exec,
    Symbolic,
}

/// Maps a code string to its class.
pub fn classify(code: &str) -> Result<ErrorClass, UnknownCode> {
    Ok(code.parse::<Code>()?.class())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    pub hint: String,
}

impl Diagnostic {
    pub fn new(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            span,
            message: message.into(),
            hint: code.default_hint().to_string(),
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = hint.into();
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn class(&self) -> ErrorClass {
        self.code.class()
    }

    /// Ordering key: position first, then code.
    pub fn sort_key(&self) -> (u32, u32, Code, &str) {
        (self.span.start_line, self.span.start_col, self.code, &self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {}: {}", self.severity, self.code, self.span, self.message)
    }
}

pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(classify("SYN001"), Ok(ErrorClass::Exec));
        assert_eq!(classify("SEM002"), Ok(ErrorClass::Symbolic));
        assert_eq!(classify("XYZ9"), Err(UnknownCode("XYZ9".into())));
    }

    #[test]
    fn catalogue_is_consistent() {
        for code in Code::ALL {
            assert_eq!(code.as_str().parse::<Code>().unwrap(), *code);
            assert!(!code.default_hint().is_empty());
            assert_eq!(code.as_str().len(), 6);
        }
    }

    #[test]
    fn code_serializes_as_string() {
        assert_eq!(serde_json::to_string(&Code::Sem007).unwrap(), "\"SEM007\"");
        assert!(serde_json::from_str::<Code>("\"NOPE00\"").is_err());
    }
}
