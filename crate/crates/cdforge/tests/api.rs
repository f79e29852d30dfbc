use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cdforge::config::{Principal, Role};
use cdforge::service::{router, ApiError, AppState, QueryResponse};
use cdforge_core::fragment::FragmentId;
use cdforge_core::graph::{eval_query, parse_query, OPEN_ISSUES_QUERY};
use cdforge_core::notation::render_page;
use cdforge_core::wiki::Wiki;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

struct Harness {
    _dir: tempfile::TempDir,
    state: Arc<AppState>,
    app: Router,
}

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    fn error(&self) -> ApiError {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    fn revision(&self) -> u64 {
        self.headers["x-revision"].to_str().unwrap().parse().unwrap()
    }
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let wiki = Wiki::open(dir.path().join("repo")).unwrap();
    wiki.import_dir(corpus_dir(), "importer").unwrap().unwrap();
    let principals: HashMap<String, Principal> = [
        ("admin-token", "root", Role::Administrator),
        ("anna-token", "anna", Role::CdEditor),
        ("bob-token", "bob", Role::CdEditor),
        ("vic-token", "vic", Role::Visitor),
    ]
    .into_iter()
    .map(|(t, u, role)| (t.to_string(), Principal { user: u.to_string(), role }))
    .collect();
    let state = Arc::new(AppState::new(wiki, principals));
    Harness {
        _dir: dir,
        app: router(state.clone()),
        state,
    }
}

impl Harness {
    fn wiki(&self) -> &Wiki {
        &self.state.wiki
    }

    async fn send(&self, method: &str, uri: &str, token: Option<&str>, headers: &[(&str, &str)], body: &str) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let resp = self
            .app
            .clone()
            .oneshot(req.body(Body::from(body.to_string())).unwrap())
            .await
            .unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        Reply {
            status,
            headers,
            body: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    async fn get(&self, uri: &str) -> Reply {
        self.send("GET", uri, None, &[], "").await
    }
}

fn id(s: &str) -> FragmentId {
    s.parse().unwrap()
}

#[tokio::test]
async fn page_formats_and_not_found() {
    let h = harness();
    let r = h.get("/page/cd:arith1+plus?format=html").await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.headers["content-type"].to_str().unwrap().starts_with("text/html"));
    assert!(r.body.contains("href=\"/page/cd:relation1+eq\""));
    let st = h.wiki().state();
    let direct = render_page(&id("cd:arith1+plus"), &st.cd("arith1").unwrap().cd, &st.table, &st.known).unwrap();
    assert_eq!(r.body, direct.markup);
    assert_eq!(h.get("/page/cd:arith1+plus").await.body, r.body);

    let src = h.get("/page/cd:arith1+plus?format=source").await;
    assert_eq!(src.status, StatusCode::OK);
    assert!(src.body.starts_with("<CDDefinition"));
    assert_eq!(src.revision(), h.wiki().head());

    let om = h.get("/page/cd:arith1+plus?format=om").await;
    assert!(om.body.contains("<OMS cd=\"relation1\" name=\"eq\"/>"), "{}", om.body);

    let missing = h.get("/page/cd:nope").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.error().code, "UnknownFragment");
    assert_eq!(h.get("/page/arith1").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(h.get("/page/cd:arith1?format=pdf").await.error().code, "InvalidFormat");
    assert_eq!(h.get("/nowhere").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unchanged_put_creates_no_revision() {
    let h = harness();
    let head = h.wiki().head();
    let src = h.get("/page/cd:arith1+plus?format=source").await;
    let base = src.revision().to_string();
    let r = h
        .send("PUT", "/page/cd:arith1+plus", Some("anna-token"), &[("x-base-revision", &base)], &src.body)
        .await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), json!({"status": "unchanged", "revision": head}));
    assert_eq!(h.wiki().head(), head);
}

#[tokio::test]
async fn put_commits_and_reports_errors() {
    let h = harness();
    let src = h.get("/page/cd:transc1+sin?format=source").await;
    let base = src.revision().to_string();
    let start = src.body.find("<Description>").unwrap() + "<Description>".len();
    let end = src.body.find("</Description>").unwrap();
    let edited = format!("{}\nThe sine function.\n{}", &src.body[..start], &src.body[end..]);

    assert_eq!(h.send("PUT", "/page/cd:transc1+sin", None, &[], &edited).await.status, StatusCode::UNAUTHORIZED);
    assert_eq!(
        h.send("PUT", "/page/cd:transc1+sin", Some("forged"), &[], &edited).await.status,
        StatusCode::UNAUTHORIZED
    );
    let denied = h.send("PUT", "/page/cd:transc1+sin", Some("vic-token"), &[], &edited).await;
    assert_eq!(denied.status, StatusCode::FORBIDDEN);

    let r = h
        .send(
            "PUT",
            "/page/cd:transc1+sin",
            Some("anna-token"),
            &[("x-base-revision", &base), ("x-summary", "tightened the wording")],
            &edited,
        )
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let body = r.json();
    assert_eq!(body["status"], "committed");
    let message = body["message"].as_str().unwrap();
    assert_eq!(message.lines().nth(1), Some("Actually changed fragment cd:transc1+sin"));
    assert_eq!(message.lines().next(), Some("[anna@SWiM] tightened the wording"));
    let rev = body["revision"].as_u64().unwrap();
    assert_eq!(h.wiki().head(), rev);

    let hist = h.get("/page/cd:transc1+sin/history").await.json();
    assert_eq!(hist[0]["number"], rev);
    assert_eq!(hist[0]["author"], "anna");
    assert!(hist[0]["header"].as_str().unwrap().starts_with(&format!("r{rev} | anna | ")));

    let stale = h
        .send("PUT", "/page/cd:transc1+sin", Some("bob-token"), &[("x-base-revision", &base)], &src.body)
        .await;
    assert_eq!(stale.status, StatusCode::CONFLICT);
    assert_eq!(stale.error().code, "Conflict");

    let broken = h
        .send("PUT", "/page/cd:transc1+sin", Some("bob-token"), &[], "<CDDefinition>\n<Name>sin</Name>\n<Role>")
        .await;
    assert_eq!(broken.status, StatusCode::UNPROCESSABLE_ENTITY);
    let err = broken.error();
    assert!(err.position.is_some(), "{err:?}");
    assert_eq!(h.wiki().head(), rev);

    let bad_base = h
        .send("PUT", "/page/cd:transc1+sin", Some("bob-token"), &[("x-base-revision", "r7")], &edited)
        .await;
    assert_eq!(bad_base.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn locks_block_other_editors() {
    let h = harness();
    let lock = h.send("POST", "/page/cd:arith1+plus/lock", Some("anna-token"), &[], "").await;
    assert_eq!(lock.status, StatusCode::CREATED, "{}", lock.body);
    let info = lock.json();
    assert_eq!(info["user"], "anna");
    assert_eq!(info["path"], "cd/arith1.ocd");
    let token = info["token"].as_str().unwrap().to_string();

    let other = h.send("POST", "/page/cd:arith1/lock", Some("bob-token"), &[], "").await;
    assert_eq!(other.status, StatusCode::LOCKED);

    let src = h.get("/page/cd:arith1+plus?format=source").await;
    let edited = src.body.replacen("</Description>", " Edited.</Description>", 1);
    let head = h.wiki().head();
    let blocked = h.send("PUT", "/page/cd:arith1+plus", Some("bob-token"), &[], &edited).await;
    assert_eq!(blocked.status, StatusCode::LOCKED);
    assert_eq!(blocked.error().code, "LockHeld");
    assert_eq!(h.wiki().head(), head);

    let unlocked = h
        .send("DELETE", "/page/cd:arith1+plus/lock", Some("anna-token"), &[("x-lock-token", &token)], "")
        .await;
    assert_eq!(unlocked.status, StatusCode::NO_CONTENT);
    let ok = h.send("PUT", "/page/cd:arith1+plus", Some("bob-token"), &[], &edited).await;
    assert_eq!(ok.status, StatusCode::OK, "{}", ok.body);
    assert_eq!(ok.json()["status"], "committed");
}

#[tokio::test]
async fn discussion_flow_and_dashboard() {
    let h = harness();
    let thread = h.get("/page/cd:arith1+plus/discussion").await.json();
    assert_eq!(thread["posts"], json!([]));
    assert_eq!(thread["thread_types"], json!(["Issue", "Question", "Untyped"]));

    let anon = h
        .send("POST", "/page/cd:arith1+plus/discussion", None, &[], r#"{"type":"Issue","body":"x"}"#)
        .await;
    assert_eq!(anon.status, StatusCode::UNAUTHORIZED);

    let issue = h
        .send(
            "POST",
            "/page/cd:arith1+plus/discussion",
            Some("vic-token"),
            &[],
            r#"{"type":"Issue","body":"Commutativity is stated twice."}"#,
        )
        .await;
    assert_eq!(issue.status, StatusCode::CREATED, "{}", issue.body);
    let issue_id = issue.json()["id"].as_str().unwrap().to_string();
    assert_eq!(issue.json()["author"], "vic");

    let dash = h.get("/dashboard/open-issues").await.json();
    assert_eq!(dash, json!([{"id": "cd:arith1+plus", "href": "/page/cd:arith1+plus"}]));
    assert_eq!(h.get("/dashboard/open-issues?type=CDDefinition").await.json(), dash);
    assert_eq!(h.get("/dashboard/open-issues?type=Example").await.json(), json!([]));

    let types = h.get(&format!("/discussion/reply-types?parent={issue_id}")).await.json();
    assert_eq!(types["types"], json!(["Idea", "Decision", "Question", "Untyped"]));
    assert_eq!(h.get("/discussion/reply-types?parent=p999").await.status, StatusCode::NOT_FOUND);

    let bad = h
        .send(
            "POST",
            "/page/cd:arith1+plus/discussion",
            Some("vic-token"),
            &[],
            &json!({"type": "Position", "parent": issue_id, "polarity": "support", "body": "+1"}).to_string(),
        )
        .await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(bad.error().code, "TypeNotAllowed");

    let idea = h
        .send(
            "POST",
            "/page/cd:arith1+plus/discussion",
            Some("anna-token"),
            &[],
            &json!({"type": "Idea", "parent": issue_id, "body": "Drop the second FMP."}).to_string(),
        )
        .await
        .json();
    let decision = h
        .send(
            "POST",
            "/page/cd:arith1+plus/discussion",
            Some("anna-token"),
            &[],
            &json!({"type": "Decision", "parent": idea["id"], "decided_idea": idea["id"], "body": "Agreed."})
                .to_string(),
        )
        .await;
    assert_eq!(decision.status, StatusCode::CREATED, "{}", decision.body);
    assert_eq!(h.get("/dashboard/open-issues").await.json(), json!([]));

    let again = h
        .send(
            "POST",
            "/page/cd:arith1+plus/discussion",
            Some("anna-token"),
            &[],
            &json!({"type": "Decision", "parent": issue_id, "decided_idea": idea["id"], "body": "Twice."}).to_string(),
        )
        .await;
    assert_eq!(again.status, StatusCode::CONFLICT);
    assert_eq!(again.error().code, "AlreadyDecided");

    let thread = h.get("/page/cd:arith1+plus/discussion").await.json();
    let posts = thread["posts"].as_array().unwrap();
    assert_eq!(posts.len(), 3);
    assert_eq!(posts[0]["reply_types"], json!(["Idea", "Question", "Untyped"]));
    for p in posts {
        let direct = h.wiki().reply_types(Some(p["id"].as_str().unwrap())).unwrap();
        assert_eq!(p["reply_types"], json!(direct));
    }

    let garbage = h
        .send("POST", "/page/cd:arith1+plus/discussion", Some("vic-token"), &[], "{\"type\":")
        .await;
    assert_eq!(garbage.status, StatusCode::BAD_REQUEST);
    assert_eq!(garbage.error().code, "InvalidJson");
}

#[tokio::test]
async fn query_endpoint_matches_direct_evaluation() {
    let h = harness();
    for body in [r#"{"type":"Issue","body":"a"}"#, r#"{"type":"Question","body":"b"}"#] {
        h.send("POST", "/page/cd:transc1+sin/discussion", Some("vic-token"), &[], body).await;
    }
    h.send("POST", "/page/cd:logic1/discussion", Some("vic-token"), &[], r#"{"type":"Issue","body":"c"}"#)
        .await;

    let r = h.send("POST", "/query", None, &[], OPEN_ISSUES_QUERY).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let resp: QueryResponse = serde_json::from_str(&r.body).unwrap();
    let hrefs: Vec<_> = resp.rows.iter().map(|row| row["P"].as_ref().unwrap().href.clone().unwrap()).collect();
    assert_eq!(hrefs, ["/page/cd:logic1", "/page/cd:transc1+sin"]);

    let st = h.wiki().state();
    let q = parse_query(OPEN_ISSUES_QUERY, &h.wiki().namespaces().prefixes()).unwrap();
    let direct = eval_query(&q, &st.store);
    assert_eq!(resp, QueryResponse::from_solutions(&direct));

    let lits = h
        .send("POST", "/query", None, &[], "SELECT ?n WHERE { ?s dc:title ?n . }")
        .await;
    assert_eq!(lits.status, StatusCode::OK, "{}", lits.body);

    let bad = h.send("POST", "/query", None, &[], "SELECT ?P WHERE {\n  ?P ?q\n").await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    let err = bad.error();
    assert_eq!(err.code, "ParseError");
    assert!(err.position.is_some());
}

#[tokio::test]
async fn cd_creation_needs_administrator() {
    let h = harness();
    let body = r#"{"name":"linalg9","description":"Vectors."}"#;
    assert_eq!(h.send("POST", "/cds", Some("anna-token"), &[], body).await.status, StatusCode::FORBIDDEN);
    let r = h.send("POST", "/cds", Some("admin-token"), &[], body).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.body);
    assert_eq!(r.json()["status"], "committed");
    assert_eq!(h.send("POST", "/cds", Some("admin-token"), &[], body).await.status, StatusCode::CONFLICT);
    let bad = h.send("POST", "/cds", Some("admin-token"), &[], r#"{"name":"9lives"}"#).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(bad.error().code, "InvalidName");

    let list = h.get("/cds").await.json();
    let names: Vec<_> = list.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"linalg9") && names.contains(&"arith1"));
    assert_eq!(list[0]["href"], format!("/page/cd:{}", names[0]));
    assert_eq!(h.get("/page/cd:linalg9").await.status, StatusCode::OK);
}

#[tokio::test]
async fn notation_edit_evicts_and_metrics_count() {
    let h = harness();
    h.get("/page/cd:arith1+plus").await;
    h.get("/page/cd:arith1+plus").await;
    let m = h.get("/metrics").await.json();
    assert_eq!(m["renders"], 1);
    assert_eq!(m["hits"], 1);

    let ntn = h.get("/notations/arith1").await;
    assert_eq!(ntn.status, StatusCode::OK);
    let changed = ntn.body.replacen("glyph=\"+\"", "glyph=\"⊕\"", 1);
    assert_ne!(changed, ntn.body);
    let r = h.send("PUT", "/notations/arith1", Some("anna-token"), &[], &changed).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let body = r.json();
    assert_eq!(body["outcome"]["status"], "committed");
    assert_eq!(body["changed_symbols"], json!([{"cd": "arith1", "name": "plus"}]));
    assert!(body["evicted"].as_array().unwrap().contains(&json!("cd:arith1+plus")));
    let page = h.get("/page/cd:arith1+plus").await;
    assert!(page.body.contains("⊕"));
    assert_eq!(h.get("/metrics").await.json()["renders"], 2);

    let broken = h.send("PUT", "/notations/arith1", Some("anna-token"), &[], "<notations").await;
    assert_eq!(broken.status, StatusCode::UNPROCESSABLE_ENTITY);
    let check = h.get("/check").await.json();
    assert!(check["diagnostics"].is_array());
}
