import base64
import hashlib
import hmac


def sign(secret, message):
    digest = hmac.new(secret, message, hashlib.sha256).digest()
    return base64.urlsafe_b64encode(digest).decode()


def verify(secret, message, signature):
    return hmac.compare_digest(sign(secret, message), signature)
