use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;

use transmode::store::{self, UploadBackend, UploadReceipt, UserIdentity};

type Request = (String, Vec<String>, Vec<u8>);

/// Accepts one request and sends back (request line, headers, body).
fn stub_server() -> (String, mpsc::Receiver<Request>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut request_line = String::new();
        reader.read_line(&mut request_line).unwrap();
        let mut headers = Vec::new();
        let mut length = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let line = line.trim_end().to_string();
            if line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap();
            }
            headers.push(line);
        }
        let mut body = vec![0; length];
        reader.read_exact(&mut body).unwrap();
        let mut stream = stream;
        stream.write_all(b"HTTP/1.1 200 OK\r\nContent-Length: 0\r\nConnection: close\r\n\r\n").unwrap();
        tx.send((request_line.trim_end().to_string(), headers, body)).unwrap();
    });
    (base, rx)
}

#[test]
fn put_goes_to_the_user_folder() {
    let fixture = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/16-12-2014.json");
    let id: UserIdentity = "c0ffee".repeat(10).chars().chain("beef".chars()).collect::<String>().parse().unwrap();
    let (base, rx) = stub_server();
    let date = store::date_from_file_name(&fixture).unwrap();
    let receipt = store::upload(&fixture, &id, date, &UploadBackend::Http { base_url: base.clone() }).unwrap();
    let expected_url = format!("{base}/{id}/16-12-2014.json");
    assert_eq!(receipt, UploadReceipt::Put { url: expected_url, status: 200 });

    let (request_line, headers, body) = rx.recv().unwrap();
    assert_eq!(request_line, format!("PUT /{id}/16-12-2014.json HTTP/1.1"));
    assert!(headers.iter().any(|h| h.eq_ignore_ascii_case("content-type: application/json")), "{headers:?}");
    assert_eq!(body, std::fs::read(&fixture).unwrap());
}

#[test]
fn unreachable_server_is_an_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let fixture = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/16-12-2014.json");
    let id: UserIdentity = "1".repeat(64).parse().unwrap();
    let date = store::date_from_file_name(&fixture).unwrap();
    let err = store::upload(&fixture, &id, date, &UploadBackend::Http { base_url: base }).unwrap_err();
    assert!(matches!(err, store::StoreError::Upload { .. }));
}
