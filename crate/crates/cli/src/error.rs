use liesym::detsolve::DetError;
use liesym::exprcore::ExprError;
use liesym::liealg::LieError;
use liesym::noether::NoetherError;
use liesym::optimal::OptimalError;

pub const NOT_RATIONAL: u8 = 2;
pub const PARSE: u8 = 3;
pub const OTHER: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn other(message: impl Into<String>) -> Self {
        Failure { code: OTHER, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure { code: PARSE, message: message.into() }
    }
}

fn expr_code(e: &ExprError) -> u8 {
    match e {
        ExprError::Parse { .. } | ExprError::UnknownIdentifier { .. } => PARSE,
        ExprError::NotRational(_) => NOT_RATIONAL,
        _ => OTHER,
    }
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Self {
        Failure { code: expr_code(&e), message: e.to_string() }
    }
}

impl From<DetError> for Failure {
    fn from(e: DetError) -> Self {
        let code = match &e {
            DetError::NotRational(_) => NOT_RATIONAL,
            DetError::Expr(x) => expr_code(x),
            DetError::Fixture(_) => PARSE,
            _ => OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<LieError> for Failure {
    fn from(e: LieError) -> Self {
        let code = match &e {
            LieError::Expr(x) => expr_code(x),
            _ => OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<OptimalError> for Failure {
    fn from(e: OptimalError) -> Self {
        let code = match &e {
            OptimalError::Expr(x) => expr_code(x),
            OptimalError::Lie(LieError::Expr(x)) => expr_code(x),
            OptimalError::Family(_) => PARSE,
            _ => OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<NoetherError> for Failure {
    fn from(e: NoetherError) -> Self {
        let code = match &e {
            NoetherError::Expr(x) => expr_code(x),
            NoetherError::Fixture(_) => PARSE,
            _ => OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}
