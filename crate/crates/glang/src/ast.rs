//! Abstract syntax shared by all phases.
//!
//! Every node carries a `NodeId` (unique within one parse) and a `Loc`.
//! Structural equality for round-trip tests ignores both; see
//! [`crate::pretty::dump_program`].

use crate::diag::Loc;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassMode {
    ConstRef,
    MutRef,
    ByValue,
}

impl PassMode {
    /// Source marker: "" for the const-ref default, `!`, or `@`.
    pub fn marker(self) -> &'static str {
        match self {
            PassMode::ConstRef => "",
            PassMode::MutRef => "!",
            PassMode::ByValue => "@",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TypeExpr {
    pub id: NodeId,
    pub loc: Loc,
    pub kind: TypeExprKind,
}

#[derive(Debug, Clone)]
pub enum TypeExprKind {
    /// A bare name: base type, type parameter, alias, struct/class, or an
    /// associated-type name inside a concept body.
    Named(String),
    /// `clid<args>`
    Apply(String, Vec<TypeExpr>),
    /// `τ*`
    Pointer(Box<TypeExpr>),
    /// `fun [<T,..>] [where {..}] (τ pass, ..) [-> τ pass]`
    Fun(FunTypeExpr),
    /// `cid<args>.id` possibly with a longer member path.
    Proj {
        concept: String,
        args: Vec<TypeExpr>,
        path: Vec<String>,
    },
}

#[derive(Debug, Clone)]
pub struct FunTypeExpr {
    pub type_params: Vec<String>,
    pub wheres: Vec<ConstraintExpr>,
    pub params: Vec<(TypeExpr, PassMode)>,
    /// None means void return, by value.
    pub ret: Option<Box<(TypeExpr, PassMode)>>,
}

#[derive(Debug, Clone)]
pub struct ConstraintExpr {
    pub loc: Loc,
    pub kind: ConstraintExprKind,
}

#[derive(Debug, Clone)]
pub enum ConstraintExprKind {
    /// `Concept<args>`
    Model { concept: String, args: Vec<TypeExpr> },
    /// `τ == τ`
    Same(TypeExpr, TypeExpr),
}

#[derive(Debug, Clone)]
pub struct Param {
    pub ty: TypeExpr,
    pub mode: PassMode,
    pub name: Option<String>,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct Field {
    pub ty: TypeExpr,
    pub name: String,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub id: NodeId,
    pub loc: Loc,
    pub kind: DeclKind,
}

#[derive(Debug, Clone)]
pub enum DeclKind {
    Concept(ConceptDecl),
    Model(ModelDecl),
    Fun(FunDecl),
    Struct(StructDecl),
    Union(StructDecl),
    Class(ClassDecl),
    Module(ModuleDecl),
    ScopeAlias { name: String, target: String },
    Import { scope: String, concept: String, args: Vec<TypeExpr> },
    Visibility(Visibility),
    Use { path: String },
    TypeAlias { name: String, ty: TypeExpr },
    Let { name: String, init: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Debug, Clone)]
pub struct ConceptDecl {
    pub name: String,
    pub params: Vec<String>,
    pub members: Vec<ConceptMember>,
}

#[derive(Debug, Clone)]
pub enum ConceptMember {
    /// `type id;`
    AssocType { name: String, loc: Loc },
    /// `τ == τ;`
    Same { lhs: TypeExpr, rhs: TypeExpr, loc: Loc },
    /// `refines cid<args>;`
    Refines { concept: String, args: Vec<TypeExpr>, loc: Loc },
    /// `require cid<args>;`
    Requires { concept: String, args: Vec<TypeExpr>, loc: Loc },
    /// Required operation (no body) or default implementation (body).
    Fun(FunDecl),
}

#[derive(Debug, Clone)]
pub struct ModelDecl {
    pub type_params: Vec<String>,
    pub wheres: Vec<ConstraintExpr>,
    pub concept: String,
    pub args: Vec<TypeExpr>,
    pub members: Vec<ModelMember>,
}

#[derive(Debug, Clone)]
pub enum ModelMember {
    /// `type id = τ;`
    TypeDef { name: String, ty: TypeExpr, loc: Loc },
    Fun(FunDecl),
}

#[derive(Debug, Clone)]
pub struct FunDecl {
    pub name: String,
    pub type_params: Vec<String>,
    pub wheres: Vec<ConstraintExpr>,
    pub params: Vec<Param>,
    /// None = void return by value.
    pub ret: Option<(TypeExpr, PassMode)>,
    /// None = signature only.
    pub body: Option<Block>,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct StructDecl {
    pub name: String,
    pub type_params: Vec<String>,
    pub wheres: Vec<ConstraintExpr>,
    pub fields: Vec<Field>,
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: String,
    pub type_params: Vec<String>,
    pub wheres: Vec<ConstraintExpr>,
    pub fields: Vec<Field>,
    pub ctors: Vec<CtorDecl>,
    pub dtor: Option<Block>,
}

#[derive(Debug, Clone)]
pub struct CtorDecl {
    pub params: Vec<Param>,
    pub inits: Vec<(String, Expr)>,
    pub body: Block,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct ModuleDecl {
    pub name: String,
    pub decls: Vec<Decl>,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub loc: Loc,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: NodeId,
    pub loc: Loc,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Let { name: String, init: Expr },
    TypeAlias { name: String, ty: TypeExpr },
    While { cond: Expr, body: Box<Stmt> },
    For { init: ForInit, cond: Option<Expr>, step: Vec<Expr>, body: Box<Stmt> },
    If { cond: Expr, then_branch: Box<Stmt>, else_branch: Option<Box<Stmt>> },
    Return { value: Option<Expr> },
    Expr(Expr),
    Block(Block),
}

#[derive(Debug, Clone)]
pub enum ForInit {
    Empty,
    Let { name: String, init: Expr, loc: Loc },
    Exprs(Vec<Expr>),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub id: NodeId,
    pub loc: Loc,
    pub kind: ExprKind,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    IntLit(i64),
    FloatLit(f64),
    BoolLit(bool),
    StringLit(String),
    Var(String),
    Call { callee: Box<Expr>, args: Vec<Expr> },
    /// `e<|τ, ..|>`
    Instantiate { callee: Box<Expr>, args: Vec<TypeExpr> },
    /// `fun(params) [name=init ..] { body }` or `fun(params) [name=init ..] : expr`
    Lambda(Box<LambdaExpr>),
    /// `model cid<args>.member`
    ModelMember { concept: String, args: Vec<TypeExpr>, member: String },
    /// `e.f` or `e->f` (through_pointer distinguishes).
    Member { base: Box<Expr>, field: String, through_pointer: bool },
    Deref(Box<Expr>),
    AddrOf(Box<Expr>),
    Index { base: Box<Expr>, index: Box<Expr> },
    /// `@τ(args)` — construct a value.
    Construct { ty: TypeExpr, args: Vec<Expr> },
    /// `new τ(args)` — heap object, yields pointer.
    NewObject { ty: TypeExpr, args: Vec<Expr> },
    /// `new τ[e]` — heap array, yields pointer.
    NewArray { ty: TypeExpr, len: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Assign { lhs: Box<Expr>, rhs: Box<Expr> },
    Cond { cond: Box<Expr>, then_branch: Box<Expr>, else_branch: Box<Expr> },
}

#[derive(Debug, Clone)]
pub struct LambdaExpr {
    pub params: Vec<Param>,
    pub captures: Vec<(String, Expr)>,
    pub body: LambdaBody,
}

#[derive(Debug, Clone)]
pub enum LambdaBody {
    Block(Block),
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
    PreInc,
    PreDec,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "not",
            UnOp::PreInc => "++",
            UnOp::PreDec => "--",
        }
    }

    /// Name of the overloadable operator function, if any.
    pub fn fun_name(self) -> Option<&'static str> {
        match self {
            UnOp::PreInc => Some("operator++"),
            UnOp::PreDec => Some("operator--"),
            UnOp::Neg => Some("operator-"),
            UnOp::Not => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    And,
    Or,
    Shl,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Shl => "<<",
        }
    }

    pub fn fun_name(self) -> Option<&'static str> {
        match self {
            BinOp::Add => Some("operator+"),
            BinOp::Sub => Some("operator-"),
            BinOp::Mul => Some("operator*"),
            BinOp::Div => Some("operator/"),
            BinOp::Rem => Some("operator%"),
            BinOp::Eq => Some("operator=="),
            BinOp::Ne => Some("operator!="),
            BinOp::Lt => Some("operator<"),
            BinOp::Gt => Some("operator>"),
            BinOp::Le => Some("operator<="),
            BinOp::Ge => Some("operator>="),
            BinOp::Shl => Some("operator<<"),
            BinOp::And | BinOp::Or => None,
        }
    }
}
