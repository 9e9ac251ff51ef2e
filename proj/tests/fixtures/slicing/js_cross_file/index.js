const os = require('os');
const { post } = require('./lib/net');

const info = os.hostname();
post('collector.example', info);
