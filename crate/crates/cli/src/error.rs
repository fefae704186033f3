use std::fmt;

/// Machine-readable failure class; also selects the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Config,
    Model,
    Io,
    Schema,
    Check,
}

impl Category {
    pub fn name(&self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Config => "config",
            Category::Model => "model",
            Category::Io => "io",
            Category::Schema => "schema",
            Category::Check => "check",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Config => 3,
            Category::Model => 4,
            Category::Io => 5,
            Category::Schema => 6,
            Category::Check => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }

    pub fn io(context: impl fmt::Display, err: std::io::Error) -> Self {
        Self::new(Category::Io, format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        Self::new(Category::Config, e.to_string())
    }
}

impl From<qndsim_core::Error> for CliError {
    fn from(e: qndsim_core::Error) -> Self {
        use qndsim_core::Error as E;
        let category = match e {
            E::Config(_) | E::OutOfRange { .. } | E::Truncation { .. } | E::DarkCountBudget { .. } => {
                Category::Config
            }
            _ => Category::Model,
        };
        Self::new(category, e.to_string())
    }
}
