//! Recursive-descent parser for G.
//!
//! Expression parsing follows the C precedence table with two G-specific
//! points: `?:` is right-associative, and the output operator `<<` sits just
//! above assignment so that a conditional may appear as its right operand.
//! Top-level error recovery skips to the next declaration keyword so several
//! syntax errors can be reported in one pass.

use crate::ast::*;
use crate::diag::{Diagnostic, Loc};
use crate::lexer::{Kw, Tok, Token};

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_id: NodeId,
    pub diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

pub fn parse_program(tokens: Vec<Token>) -> (Vec<Decl>, Vec<Diagnostic>) {
    let mut p = Parser::new(tokens);
    let decls = p.program();
    (decls, p.diags)
}

/// Tokenize and parse in one step.
pub fn parse_source(file: &str, text: &str) -> Result<Vec<Decl>, Vec<Diagnostic>> {
    let toks = crate::lexer::tokenize(file, text).map_err(|d| vec![d])?;
    let (decls, diags) = parse_program(toks);
    if diags.is_empty() {
        Ok(decls)
    } else {
        Err(diags)
    }
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Parser {
        Parser {
            toks,
            pos: 0,
            next_id: 0,
            diags: Vec::new(),
        }
    }

    fn id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.cur().tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn loc(&self) -> Loc {
        self.cur().loc.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.cur().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        std::mem::discriminant(self.peek()) == std::mem::discriminant(t)
            && (!matches!(t, Tok::Kw(_))
                || matches!((self.peek(), t), (Tok::Kw(a), Tok::Kw(b)) if a == b))
    }

    fn at_kw(&self, k: Kw) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<Token> {
        if self.at(t) {
            Ok(self.bump())
        } else {
            Err(self.err_here(&format!("expected {}, found {}", what, self.cur().describe())))
        }
    }

    fn expect_kw(&mut self, k: Kw) -> PResult<Token> {
        if self.at_kw(k) {
            Ok(self.bump())
        } else {
            Err(self.err_here(&format!(
                "expected `{}`, found {}",
                k.as_str(),
                self.cur().describe()
            )))
        }
    }

    fn err_here(&self, msg: &str) -> Diagnostic {
        Diagnostic::error(self.loc(), msg.to_string())
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err_here(&format!(
                "expected {}, found {}",
                what,
                self.cur().describe()
            ))),
        }
    }

    // ---- program & recovery ----------------------------------------------

    fn program(&mut self) -> Vec<Decl> {
        let mut decls = Vec::new();
        while !self.at(&Tok::Eof) {
            match self.decl() {
                Ok(d) => decls.push(d),
                Err(e) => {
                    self.diags.push(e);
                    self.recover_to_decl();
                }
            }
        }
        decls
    }

    fn recover_to_decl(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    depth = depth.saturating_sub(1);
                    self.bump();
                }
                Tok::Kw(
                    Kw::Fun
                    | Kw::Concept
                    | Kw::Model
                    | Kw::Struct
                    | Kw::Class
                    | Kw::Union
                    | Kw::Module
                    | Kw::Scope
                    | Kw::Import
                    | Kw::Public
                    | Kw::Private
                    | Kw::Use,
                ) if depth == 0 => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    // ---- declarations ------------------------------------------------------

    fn decl(&mut self) -> PResult<Decl> {
        let loc = self.loc();
        let id = self.id();
        let kind = match self.peek().clone() {
            Tok::Kw(Kw::Concept) => DeclKind::Concept(self.concept_decl()?),
            Tok::Kw(Kw::Model) => DeclKind::Model(self.model_decl()?),
            Tok::Kw(Kw::Fun) => {
                self.bump();
                DeclKind::Fun(self.fun_rest()?)
            }
            Tok::Kw(Kw::Struct) => DeclKind::Struct(self.struct_decl()?),
            Tok::Kw(Kw::Union) => DeclKind::Union(self.struct_decl()?),
            Tok::Kw(Kw::Class) => DeclKind::Class(self.class_decl()?),
            Tok::Kw(Kw::Module) => {
                self.bump();
                let name = self.ident("module name")?;
                self.expect(&Tok::LBrace, "`{`")?;
                let mut decls = Vec::new();
                while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
                    decls.push(self.decl()?);
                }
                self.expect(&Tok::RBrace, "`}`")?;
                self.eat(&Tok::Semi);
                DeclKind::Module(ModuleDecl { name, decls })
            }
            Tok::Kw(Kw::Scope) => {
                self.bump();
                let name = self.ident("scope alias name")?;
                self.expect(&Tok::Assign, "`=`")?;
                let target = self.ident("scope name")?;
                self.expect(&Tok::Semi, "`;`")?;
                DeclKind::ScopeAlias { name, target }
            }
            Tok::Kw(Kw::Import) => {
                self.bump();
                let scope = self.ident("scope name")?;
                self.expect(&Tok::Dot, "`.`")?;
                let concept = self.ident("concept name")?;
                self.expect(&Tok::Lt, "`<`")?;
                let args = self.type_list(&Tok::Gt)?;
                self.expect(&Tok::Gt, "`>`")?;
                self.expect(&Tok::Semi, "`;`")?;
                DeclKind::Import {
                    scope,
                    concept,
                    args,
                }
            }
            Tok::Kw(Kw::Public) => {
                self.bump();
                self.expect(&Tok::Colon, "`:`")?;
                DeclKind::Visibility(Visibility::Public)
            }
            Tok::Kw(Kw::Private) => {
                self.bump();
                self.expect(&Tok::Colon, "`:`")?;
                DeclKind::Visibility(Visibility::Private)
            }
            Tok::Kw(Kw::Use) => {
                self.bump();
                let path = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.bump();
                        s
                    }
                    _ => return Err(self.err_here("expected string literal after `use`")),
                };
                self.expect(&Tok::Semi, "`;`")?;
                DeclKind::Use { path }
            }
            Tok::Kw(Kw::Type) => {
                self.bump();
                let name = self.ident("type alias name")?;
                self.expect(&Tok::Assign, "`=`")?;
                let ty = self.type_expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                DeclKind::TypeAlias { name, ty }
            }
            Tok::Kw(Kw::Let) => {
                self.bump();
                let name = self.ident("variable name")?;
                self.expect(&Tok::Assign, "`=`")?;
                let init = self.expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                DeclKind::Let { name, init }
            }
            _ => {
                return Err(self.err_here(&format!(
                    "expected a declaration, found {}",
                    self.cur().describe()
                )))
            }
        };
        Ok(Decl { id, loc, kind })
    }

    fn concept_decl(&mut self) -> PResult<ConceptDecl> {
        self.expect_kw(Kw::Concept)?;
        let name = self.ident("concept name")?;
        self.expect(&Tok::Lt, "`<`")?;
        let mut params = Vec::new();
        loop {
            params.push(self.ident("type parameter")?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::Gt, "`>`")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut members = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            members.push(self.concept_member()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        self.expect(&Tok::Semi, "`;`")?;
        Ok(ConceptDecl {
            name,
            params,
            members,
        })
    }

    fn concept_member(&mut self) -> PResult<ConceptMember> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Kw(Kw::Type) => {
                self.bump();
                let name = self.ident("associated type name")?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(ConceptMember::AssocType { name, loc })
            }
            Tok::Kw(Kw::Refines) => {
                self.bump();
                let (concept, args) = self.concept_ref()?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(ConceptMember::Refines { concept, args, loc })
            }
            Tok::Kw(Kw::Require) => {
                self.bump();
                let (concept, args) = self.concept_ref()?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(ConceptMember::Requires { concept, args, loc })
            }
            Tok::Kw(Kw::Fun) => {
                self.bump();
                Ok(ConceptMember::Fun(self.fun_rest()?))
            }
            _ => {
                let lhs = self.type_expr()?;
                self.expect(&Tok::EqEq, "`==`")?;
                let rhs = self.type_expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                Ok(ConceptMember::Same { lhs, rhs, loc })
            }
        }
    }

    fn concept_ref(&mut self) -> PResult<(String, Vec<TypeExpr>)> {
        let concept = self.ident("concept name")?;
        self.expect(&Tok::Lt, "`<`")?;
        let args = self.type_list(&Tok::Gt)?;
        self.expect(&Tok::Gt, "`>`")?;
        Ok((concept, args))
    }

    fn model_decl(&mut self) -> PResult<ModelDecl> {
        self.expect_kw(Kw::Model)?;
        let type_params = if self.at(&Tok::Lt) {
            self.bump();
            let mut ps = Vec::new();
            loop {
                ps.push(self.ident("type parameter")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Gt, "`>`")?;
            ps
        } else {
            Vec::new()
        };
        let wheres = self.opt_where_clause()?;
        let (concept, args) = self.concept_ref()?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut members = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            let mloc = self.loc();
            match self.peek().clone() {
                Tok::Kw(Kw::Type) => {
                    self.bump();
                    let name = self.ident("type member name")?;
                    self.expect(&Tok::Assign, "`=`")?;
                    let ty = self.type_expr()?;
                    self.expect(&Tok::Semi, "`;`")?;
                    members.push(ModelMember::TypeDef {
                        name,
                        ty,
                        loc: mloc,
                    });
                }
                Tok::Kw(Kw::Fun) => {
                    self.bump();
                    members.push(ModelMember::Fun(self.fun_rest()?));
                }
                _ => {
                    return Err(self.err_here(
                        "expected a type definition or function definition in model body",
                    ))
                }
            }
        }
        self.expect(&Tok::RBrace, "`}`")?;
        self.expect(&Tok::Semi, "`;`")?;
        Ok(ModelDecl {
            type_params,
            wheres,
            concept,
            args,
            members,
        })
    }

    fn opt_where_clause(&mut self) -> PResult<Vec<ConstraintExpr>> {
        if !self.at_kw(Kw::Where) {
            return Ok(Vec::new());
        }
        self.bump();
        self.expect(&Tok::LBrace, "`{`")?;
        let mut cs = Vec::new();
        if !self.at(&Tok::RBrace) {
            loop {
                cs.push(self.constraint()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(cs)
    }

    fn constraint(&mut self) -> PResult<ConstraintExpr> {
        let loc = self.loc();
        let ty = self.type_expr()?;
        if self.eat(&Tok::EqEq) {
            let rhs = self.type_expr()?;
            return Ok(ConstraintExpr {
                loc,
                kind: ConstraintExprKind::Same(ty, rhs),
            });
        }
        match ty.kind {
            TypeExprKind::Apply(concept, args) => Ok(ConstraintExpr {
                loc,
                kind: ConstraintExprKind::Model { concept, args },
            }),
            _ => Err(Diagnostic::error(
                loc,
                "expected a model constraint `Concept<..>` or a same-type constraint `t == t`",
            )),
        }
    }

    /// Parses a function after the `fun` keyword has been consumed.
    fn fun_rest(&mut self) -> PResult<FunDecl> {
        let loc = self.loc();
        let name = self.fun_name()?;
        let type_params = if self.at(&Tok::Lt) {
            self.bump();
            let mut ps = Vec::new();
            loop {
                ps.push(self.ident("type parameter")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Gt, "`>`")?;
            ps
        } else {
            Vec::new()
        };
        let wheres = self.opt_where_clause()?;
        self.expect(&Tok::LParen, "`(`")?;
        let params = self.param_list()?;
        self.expect(&Tok::RParen, "`)`")?;
        let ret = if self.eat(&Tok::Arrow) {
            let ty = self.type_expr()?;
            let mode = self.opt_pass_mode();
            Some((ty, mode))
        } else {
            None
        };
        let body = if self.at(&Tok::LBrace) {
            Some(self.block()?)
        } else {
            self.expect(&Tok::Semi, "`;` or function body")?;
            None
        };
        Ok(FunDecl {
            name,
            type_params,
            wheres,
            params,
            ret,
            body,
            loc,
        })
    }

    fn fun_name(&mut self) -> PResult<String> {
        let name = self.ident("function name")?;
        if name == "operator" {
            let op = match self.peek().clone() {
                Tok::EqEq => "==",
                Tok::Ne => "!=",
                Tok::Lt => "<",
                Tok::Gt => ">",
                Tok::Le => "<=",
                Tok::Ge => ">=",
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Star => "*",
                Tok::Slash => "/",
                Tok::Percent => "%",
                Tok::PlusPlus => "++",
                Tok::MinusMinus => "--",
                Tok::Shl => "<<",
                Tok::Assign => "=",
                Tok::LBracket => {
                    self.bump();
                    self.expect(&Tok::RBracket, "`]`")?;
                    return Ok("operator[]".to_string());
                }
                _ => return Err(self.err_here("expected an operator symbol after `operator`")),
            };
            self.bump();
            Ok(format!("operator{op}"))
        } else {
            Ok(name)
        }
    }

    fn param_list(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if self.at(&Tok::RParen) {
            return Ok(params);
        }
        loop {
            let loc = self.loc();
            let ty = self.type_expr()?;
            let mode = self.opt_pass_mode();
            let name = match self.peek().clone() {
                Tok::Ident(s) => {
                    self.bump();
                    Some(s)
                }
                _ => None,
            };
            params.push(Param {
                ty,
                mode,
                name,
                loc,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(params)
    }

    fn opt_pass_mode(&mut self) -> PassMode {
        if self.eat(&Tok::At) {
            PassMode::ByValue
        } else if self.eat(&Tok::Bang) {
            PassMode::MutRef
        } else if self.eat(&Tok::Amp) {
            PassMode::ConstRef
        } else {
            PassMode::ConstRef
        }
    }

    fn struct_decl(&mut self) -> PResult<StructDecl> {
        // struct or union keyword
        self.bump();
        let name = self.ident("struct name")?;
        let type_params = if self.at(&Tok::Lt) {
            self.bump();
            let mut ps = Vec::new();
            loop {
                ps.push(self.ident("type parameter")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Gt, "`>`")?;
            ps
        } else {
            Vec::new()
        };
        let wheres = self.opt_where_clause()?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut fields = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            fields.push(self.field()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        self.expect(&Tok::Semi, "`;`")?;
        Ok(StructDecl {
            name,
            type_params,
            wheres,
            fields,
        })
    }

    fn field(&mut self) -> PResult<Field> {
        let loc = self.loc();
        let ty = self.type_expr()?;
        let name = self.ident("field name")?;
        self.expect(&Tok::Semi, "`;`")?;
        Ok(Field { ty, name, loc })
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        self.expect_kw(Kw::Class)?;
        let name = self.ident("class name")?;
        let type_params = if self.at(&Tok::Lt) {
            self.bump();
            let mut ps = Vec::new();
            loop {
                ps.push(self.ident("type parameter")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Gt, "`>`")?;
            ps
        } else {
            Vec::new()
        };
        let wheres = self.opt_where_clause()?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut fields = Vec::new();
        let mut ctors = Vec::new();
        let mut dtor = None;
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            if self.at(&Tok::Tilde) {
                let loc = self.loc();
                self.bump();
                let dname = self.ident("destructor name")?;
                if dname != name {
                    return Err(Diagnostic::error(
                        loc,
                        format!("destructor name `~{dname}` must match class name `{name}`"),
                    ));
                }
                self.expect(&Tok::LParen, "`(`")?;
                self.expect(&Tok::RParen, "`)`")?;
                dtor = Some(self.block()?);
                continue;
            }
            // Constructor: the class name immediately followed by `(`.
            if let Tok::Ident(id) = self.peek() {
                if *id == name && matches!(self.peek_at(1), Tok::LParen) {
                    let loc = self.loc();
                    self.bump();
                    self.expect(&Tok::LParen, "`(`")?;
                    let params = self.param_list()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    let mut inits = Vec::new();
                    if self.eat(&Tok::Colon) {
                        loop {
                            let f = self.ident("field name in initializer list")?;
                            self.expect(&Tok::LParen, "`(`")?;
                            let e = self.expr()?;
                            self.expect(&Tok::RParen, "`)`")?;
                            inits.push((f, e));
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    let body = self.block()?;
                    ctors.push(CtorDecl {
                        params,
                        inits,
                        body,
                        loc,
                    });
                    continue;
                }
            }
            fields.push(self.field()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        self.expect(&Tok::Semi, "`;`")?;
        Ok(ClassDecl {
            name,
            type_params,
            wheres,
            fields,
            ctors,
            dtor,
        })
    }

    // ---- types -------------------------------------------------------------

    fn type_list(&mut self, terminator: &Tok) -> PResult<Vec<TypeExpr>> {
        let mut tys = Vec::new();
        if self.at(terminator) {
            return Ok(tys);
        }
        loop {
            tys.push(self.type_expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(tys)
    }

    pub fn type_expr(&mut self) -> PResult<TypeExpr> {
        let loc = self.loc();
        let id = self.id();
        let mut kind = match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.type_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                inner.kind
            }
            Tok::Kw(Kw::Fun) => {
                self.bump();
                let type_params = if self.at(&Tok::Lt) {
                    self.bump();
                    let mut ps = Vec::new();
                    loop {
                        ps.push(self.ident("type parameter")?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(&Tok::Gt, "`>`")?;
                    ps
                } else {
                    Vec::new()
                };
                let wheres = self.opt_where_clause()?;
                self.expect(&Tok::LParen, "`(`")?;
                let mut params = Vec::new();
                if !self.at(&Tok::RParen) {
                    loop {
                        let ty = self.type_expr()?;
                        let mode = self.opt_pass_mode();
                        params.push((ty, mode));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RParen, "`)`")?;
                let ret = if self.eat(&Tok::Arrow) {
                    let ty = self.type_expr()?;
                    let mode = self.opt_pass_mode();
                    Some(Box::new((ty, mode)))
                } else {
                    None
                };
                TypeExprKind::Fun(FunTypeExpr {
                    type_params,
                    wheres,
                    params,
                    ret,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at(&Tok::Lt) {
                    self.bump();
                    let args = self.type_list(&Tok::Gt)?;
                    self.expect(&Tok::Gt, "`>`")?;
                    if self.at(&Tok::Dot) {
                        let mut path = Vec::new();
                        while self.eat(&Tok::Dot) {
                            path.push(self.ident("associated type name")?);
                        }
                        TypeExprKind::Proj {
                            concept: name,
                            args,
                            path,
                        }
                    } else {
                        TypeExprKind::Apply(name, args)
                    }
                } else {
                    TypeExprKind::Named(name)
                }
            }
            _ => {
                return Err(self.err_here(&format!(
                    "expected a type, found {}",
                    self.cur().describe()
                )))
            }
        };
        while self.at(&Tok::Star) {
            self.bump();
            kind = TypeExprKind::Pointer(Box::new(TypeExpr {
                id: self.id(),
                loc: loc.clone(),
                kind,
            }));
        }
        Ok(TypeExpr { id, loc, kind })
    }

    // ---- statements ----------------------------------------------------------

    fn block(&mut self) -> PResult<Block> {
        let loc = self.loc();
        self.expect(&Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            stmts.push(self.stmt()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(Block { stmts, loc })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        let id = self.id();
        let kind = match self.peek().clone() {
            Tok::Kw(Kw::Let) => {
                self.bump();
                let name = self.ident("variable name")?;
                self.expect(&Tok::Assign, "`=`")?;
                let init = self.expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Let { name, init }
            }
            Tok::Kw(Kw::Type) => {
                self.bump();
                let name = self.ident("type alias name")?;
                self.expect(&Tok::Assign, "`=`")?;
                let ty = self.type_expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::TypeAlias { name, ty }
            }
            Tok::Kw(Kw::While) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let body = Box::new(self.stmt()?);
                StmtKind::While { cond, body }
            }
            Tok::Kw(Kw::For) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let init = if self.at(&Tok::Semi) {
                    ForInit::Empty
                } else if self.at_kw(Kw::Let) {
                    let lloc = self.loc();
                    self.bump();
                    let name = self.ident("variable name")?;
                    self.expect(&Tok::Assign, "`=`")?;
                    let init = self.expr()?;
                    ForInit::Let {
                        name,
                        init,
                        loc: lloc,
                    }
                } else {
                    let mut es = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        es.push(self.expr()?);
                    }
                    ForInit::Exprs(es)
                };
                self.expect(&Tok::Semi, "`;`")?;
                let cond = if self.at(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(&Tok::Semi, "`;`")?;
                let mut step = Vec::new();
                if !self.at(&Tok::RParen) {
                    step.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        step.push(self.expr()?);
                    }
                }
                self.expect(&Tok::RParen, "`)`")?;
                let body = Box::new(self.stmt()?);
                StmtKind::For {
                    init,
                    cond,
                    step,
                    body,
                }
            }
            Tok::Kw(Kw::If) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let then_branch = Box::new(self.stmt()?);
                let else_branch = if self.at_kw(Kw::Else) {
                    self.bump();
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::Kw(Kw::Return) => {
                self.bump();
                let value = if self.at(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Return { value }
            }
            Tok::LBrace => StmtKind::Block(self.block()?),
            _ => {
                let e = self.expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { id, loc, kind })
    }

    // ---- expressions ---------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        self.assign_expr()
    }

    fn mk(&mut self, loc: Loc, kind: ExprKind) -> Expr {
        Expr {
            id: self.id(),
            loc,
            kind,
        }
    }

    fn assign_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let lhs = self.shl_expr()?;
        if self.at(&Tok::Assign) {
            self.bump();
            let rhs = self.assign_expr()?;
            return Ok(self.mk(
                loc,
                ExprKind::Assign {
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            ));
        }
        Ok(lhs)
    }

    fn shl_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.cond_expr()?;
        while self.at(&Tok::Shl) {
            self.bump();
            let rhs = self.cond_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op: BinOp::Shl,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn cond_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let cond = self.or_expr()?;
        if self.at(&Tok::Question) {
            self.bump();
            let then_branch = self.cond_expr()?;
            self.expect(&Tok::Colon, "`:`")?;
            let else_branch = self.cond_expr()?;
            return Ok(self.mk(
                loc,
                ExprKind::Cond {
                    cond: Box::new(cond),
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                },
            ));
        }
        Ok(cond)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.and_expr()?;
        while self.at_kw(Kw::Or) {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op: BinOp::Or,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.equality_expr()?;
        while self.at_kw(Kw::And) {
            self.bump();
            let rhs = self.equality_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op: BinOp::And,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn equality_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.relational_expr()?;
        loop {
            let op = if self.at(&Tok::EqEq) {
                BinOp::Eq
            } else if self.at(&Tok::Ne) {
                BinOp::Ne
            } else {
                break;
            };
            self.bump();
            let rhs = self.relational_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn relational_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.additive_expr()?;
        loop {
            let op = if self.at(&Tok::Lt) {
                BinOp::Lt
            } else if self.at(&Tok::Gt) {
                BinOp::Gt
            } else if self.at(&Tok::Le) {
                BinOp::Le
            } else if self.at(&Tok::Ge) {
                BinOp::Ge
            } else {
                break;
            };
            self.bump();
            let rhs = self.additive_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn additive_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.multiplicative_expr()?;
        loop {
            let op = if self.at(&Tok::Plus) {
                BinOp::Add
            } else if self.at(&Tok::Minus) {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            let rhs = self.multiplicative_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn multiplicative_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let mut lhs = self.unary_expr()?;
        loop {
            let op = if self.at(&Tok::Star) {
                BinOp::Mul
            } else if self.at(&Tok::Slash) {
                BinOp::Div
            } else if self.at(&Tok::Percent) {
                BinOp::Rem
            } else {
                break;
            };
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = self.mk(
                loc.clone(),
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
            );
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(
                    loc,
                    ExprKind::Unary {
                        op: UnOp::Neg,
                        operand: Box::new(e),
                    },
                ))
            }
            Tok::Kw(Kw::Not) => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(
                    loc,
                    ExprKind::Unary {
                        op: UnOp::Not,
                        operand: Box::new(e),
                    },
                ))
            }
            Tok::PlusPlus => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(
                    loc,
                    ExprKind::Unary {
                        op: UnOp::PreInc,
                        operand: Box::new(e),
                    },
                ))
            }
            Tok::MinusMinus => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(
                    loc,
                    ExprKind::Unary {
                        op: UnOp::PreDec,
                        operand: Box::new(e),
                    },
                ))
            }
            Tok::Star => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(loc, ExprKind::Deref(Box::new(e))))
            }
            Tok::Amp => {
                self.bump();
                let e = self.unary_expr()?;
                Ok(self.mk(loc, ExprKind::AddrOf(Box::new(e))))
            }
            Tok::At => {
                self.bump();
                let ty = self.type_expr()?;
                self.expect(&Tok::LParen, "`(`")?;
                let args = self.expr_list(&Tok::RParen)?;
                self.expect(&Tok::RParen, "`)`")?;
                let e = self.mk(loc, ExprKind::Construct { ty, args });
                self.postfix_tail(e)
            }
            Tok::Kw(Kw::New) => {
                self.bump();
                let ty = self.type_expr()?;
                if self.eat(&Tok::LBracket) {
                    let len = self.expr()?;
                    self.expect(&Tok::RBracket, "`]`")?;
                    let e = self.mk(
                        loc,
                        ExprKind::NewArray {
                            ty,
                            len: Box::new(len),
                        },
                    );
                    self.postfix_tail(e)
                } else {
                    self.expect(&Tok::LParen, "`(`")?;
                    let args = self.expr_list(&Tok::RParen)?;
                    self.expect(&Tok::RParen, "`)`")?;
                    let e = self.mk(loc, ExprKind::NewObject { ty, args });
                    self.postfix_tail(e)
                }
            }
            _ => self.postfix_expr(),
        }
    }

    fn expr_list(&mut self, terminator: &Tok) -> PResult<Vec<Expr>> {
        let mut es = Vec::new();
        if self.at(terminator) {
            return Ok(es);
        }
        loop {
            es.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(es)
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let e = self.primary_expr()?;
        self.postfix_tail(e)
    }

    fn postfix_tail(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            match self.peek().clone() {
                Tok::LParen => {
                    let loc = e.loc.clone();
                    self.bump();
                    let args = self.expr_list(&Tok::RParen)?;
                    self.expect(&Tok::RParen, "`)`")?;
                    e = self.mk(
                        loc,
                        ExprKind::Call {
                            callee: Box::new(e),
                            args,
                        },
                    );
                }
                Tok::OpenInst => {
                    let loc = e.loc.clone();
                    self.bump();
                    let args = self.type_list(&Tok::CloseInst)?;
                    self.expect(&Tok::CloseInst, "`|>`")?;
                    e = self.mk(
                        loc,
                        ExprKind::Instantiate {
                            callee: Box::new(e),
                            args,
                        },
                    );
                }
                Tok::Dot => {
                    let loc = self.loc();
                    self.bump();
                    let field = self.fun_name()?;
                    e = self.mk(
                        loc,
                        ExprKind::Member {
                            base: Box::new(e),
                            field,
                            through_pointer: false,
                        },
                    );
                }
                Tok::Arrow => {
                    let loc = self.loc();
                    self.bump();
                    let field = self.fun_name()?;
                    e = self.mk(
                        loc,
                        ExprKind::Member {
                            base: Box::new(e),
                            field,
                            through_pointer: true,
                        },
                    );
                }
                Tok::LBracket => {
                    let loc = self.loc();
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(&Tok::RBracket, "`]`")?;
                    e = self.mk(
                        loc,
                        ExprKind::Index {
                            base: Box::new(e),
                            index: Box::new(idx),
                        },
                    );
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::IntLit(v)))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::FloatLit(v)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::StringLit(s)))
            }
            Tok::Kw(Kw::True) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::BoolLit(true)))
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::BoolLit(false)))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(self.mk(loc, ExprKind::Var(name)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Kw(Kw::Model) => {
                self.bump();
                let concept = self.ident("concept name")?;
                self.expect(&Tok::Lt, "`<`")?;
                let args = self.type_list(&Tok::Gt)?;
                self.expect(&Tok::Gt, "`>`")?;
                self.expect(&Tok::Dot, "`.`")?;
                let member = self.fun_name()?;
                Ok(self.mk(
                    loc,
                    ExprKind::ModelMember {
                        concept,
                        args,
                        member,
                    },
                ))
            }
            Tok::Kw(Kw::Fun) => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let params = self.param_list()?;
                self.expect(&Tok::RParen, "`)`")?;
                let mut captures = Vec::new();
                while let Tok::Ident(n) = self.peek().clone() {
                    if !matches!(self.peek_at(1), Tok::Assign) {
                        break;
                    }
                    self.bump();
                    self.bump();
                    // Captured initializers stop below assignment level so a
                    // following capture name is not swallowed.
                    let e = self.shl_expr()?;
                    captures.push((n, e));
                    self.eat(&Tok::Comma);
                }
                let body = if self.eat(&Tok::Colon) {
                    LambdaBody::Expr(self.expr()?)
                } else {
                    LambdaBody::Block(self.block()?)
                };
                Ok(self.mk(
                    loc,
                    ExprKind::Lambda(Box::new(LambdaExpr {
                        params,
                        captures,
                        body,
                    })),
                ))
            }
            _ => Err(self.err_here(&format!(
                "expected an expression, found {}",
                self.cur().describe()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse(src: &str) -> Vec<Decl> {
        let toks = tokenize("t.g", src).unwrap();
        let (decls, diags) = parse_program(toks);
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
        decls
    }

    const INPUT_ITERATOR: &str = r#"
concept InputIterator<X> {
  type value;
  type difference;
  refines EqualityComparable<X>;
  refines Regular<X>;
  require SignedIntegral<difference>;
  fun operator*(X b) -> value@;
  fun operator++(X! c) -> X!;
};
"#;

    #[test]
    fn parses_input_iterator_concept() {
        let decls = parse(INPUT_ITERATOR);
        assert_eq!(decls.len(), 1);
        let DeclKind::Concept(c) = &decls[0].kind else {
            panic!("expected concept");
        };
        assert_eq!(c.name, "InputIterator");
        let assoc = c
            .members
            .iter()
            .filter(|m| matches!(m, ConceptMember::AssocType { .. }))
            .count();
        let refreq = c
            .members
            .iter()
            .filter(|m| {
                matches!(
                    m,
                    ConceptMember::Refines { .. } | ConceptMember::Requires { .. }
                )
            })
            .count();
        let sigs = c
            .members
            .iter()
            .filter(|m| matches!(m, ConceptMember::Fun(f) if f.body.is_none()))
            .count();
        assert_eq!(assoc, 2);
        assert_eq!(refreq, 3);
        assert_eq!(sigs, 2);
    }

    const MERGE: &str = r#"
fun merge<Iter1,Iter2,Iter3>
where { InputIterator<Iter1>, InputIterator<Iter2>,
        LessThanComparable<InputIterator<Iter1>.value>,
        InputIterator<Iter1>.value == InputIterator<Iter2>.value,
        OutputIterator<Iter3, InputIterator<Iter1>.value> }
(Iter1@ first1, Iter1 last1, Iter2@ first2, Iter2 last2, Iter3@ result)
  -> Iter3@
{
  while (first1 != last1 and first2 != last2) {
    if (*first2 < *first1) {
      result << *first2; ++first2;
    } else {
      result << *first1; ++first1;
    }
  }
  return copy(first2, last2, copy(first1, last1, result));
}
"#;

    #[test]
    fn parses_merge() {
        let decls = parse(MERGE);
        assert_eq!(decls.len(), 1);
        let DeclKind::Fun(f) = &decls[0].kind else {
            panic!("expected fun");
        };
        assert_eq!(f.type_params.len(), 3);
        assert_eq!(f.wheres.len(), 5);
        assert!(f.body.is_some());
        assert_eq!(f.params.len(), 5);
    }

    #[test]
    fn missing_model_body_is_a_syntax_error() {
        let toks = tokenize("t.g", "model C<T,U>").unwrap();
        let (_, diags) = parse_program(toks);
        assert!(!diags.is_empty());
        assert!(diags[0].message.contains("expected"));
    }

    #[test]
    fn output_op_binds_looser_than_conditional() {
        let decls = parse("fun f() { result << *first == old ? neu : *first; }");
        let DeclKind::Fun(f) = &decls[0].kind else {
            panic!()
        };
        let body = f.body.as_ref().unwrap();
        let StmtKind::Expr(e) = &body.stmts[0].kind else {
            panic!()
        };
        let ExprKind::Binary { op, rhs, .. } = &e.kind else {
            panic!("expected << at top, got {e:?}")
        };
        assert_eq!(*op, BinOp::Shl);
        assert!(matches!(rhs.kind, ExprKind::Cond { .. }));
    }

    #[test]
    fn parses_explicit_instantiation() {
        let decls = parse("fun f() { let g = id<|int|>; }");
        let DeclKind::Fun(f) = &decls[0].kind else {
            panic!()
        };
        let StmtKind::Let { init, .. } = &f.body.as_ref().unwrap().stmts[0].kind else {
            panic!()
        };
        assert!(matches!(init.kind, ExprKind::Instantiate { .. }));
    }

    #[test]
    fn parses_lambda_with_captures() {
        let decls = parse("fun f() { for_each(a, a + n, fun(int x) p=&sum { *p = *p + x; }); }");
        assert_eq!(decls.len(), 1);
    }

    #[test]
    fn parses_colon_lambda_and_model_member() {
        let decls =
            parse("fun f() { let cmp = model EqualityComparable<T>.operator==; let l = fun(T a, T b) c=cmp : c(a, b); }");
        assert_eq!(decls.len(), 1);
    }

    #[test]
    fn parses_class_with_ctors() {
        let decls = parse(
            r#"
class reverse_iterator<Iter> where { Regular<Iter>, DefaultConstructible<Iter> } {
  reverse_iterator(Iter base) : curr(base) { }
  reverse_iterator(reverse_iterator<Iter> other) : curr(other.curr) { }
  Iter curr;
};
"#,
        );
        let DeclKind::Class(c) = &decls[0].kind else {
            panic!()
        };
        assert_eq!(c.ctors.len(), 2);
        assert_eq!(c.fields.len(), 1);
    }

    #[test]
    fn recovers_and_reports_multiple_errors() {
        let toks = tokenize("t.g", "model C<T,U>\nfun f( { }\nconcept D<T> { };").unwrap();
        let (decls, diags) = parse_program(toks);
        assert!(diags.len() >= 2, "expected at least 2 errors: {diags:?}");
        assert!(decls
            .iter()
            .any(|d| matches!(&d.kind, DeclKind::Concept(c) if c.name == "D")));
    }
}
