use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate segment: both endpoints coincide")]
    DegenerateSegment,

    #[error("invalid cylinder: height and radius must be positive")]
    InvalidCylinder,

    #[error("unservable link from {tx} to {rx}: steering angle {angle_deg:.2} deg exceeds {max_deg:.2} deg")]
    UnservableLink {
        tx: String,
        rx: String,
        angle_deg: f64,
        max_deg: f64,
    },

    #[error("surface resolution must be positive, got {0}")]
    InvalidResolution(f64),

    #[error("access point {0} has no served users")]
    EmptyUserSet(String),

    #[error("no channel gain for link {0}")]
    MissingGain(String),

    #[error("relay {0} is not paired with an access point")]
    UnpairedRelay(String),

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error bound {error:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("user {user} depends on {links} blockage links (limit {limit}); use Monte Carlo instead")]
    TooManyLinks {
        user: String,
        links: usize,
        limit: usize,
    },

    #[error("invalid scenario at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("unknown key in scenario: {0}")]
    UnknownKey(String),

    #[error("cannot parse scenario: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
