const https = require('https');
const fs = require('fs');

function report(useCache) {
  let body;
  if (useCache) {
    body = fs.readFileSync('/tmp/cache.json', 'utf8');
  } else {
    body = JSON.stringify({ ok: true });
  }
  https.get('https://status.example/?q=' + body);
}

report(process.argv.includes('--cache'));
