#include "intelguard/package_source.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <map>
#include <regex>
#include <set>

#include "intelguard/error.hpp"
#include "intelguard/log.hpp"
#include "intelguard/text_util.hpp"
#include "json.hpp"

namespace intelguard {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxMemberBytes = 8u << 20;

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string basename(const std::string& path) {
    const auto pos = path.rfind('/');
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

std::string dirname(const std::string& path) {
    const auto pos = path.rfind('/');
    return pos == std::string::npos ? "" : path.substr(0, pos);
}

bool is_manifest(const std::string& name) {
    return name == "package.json" || name == "setup.py" || name == "PKG-INFO" || name == "pyproject.toml" ||
           name == "METADATA";
}

bool wanted(const std::string& path) {
    return language_for_path(path) != Language::Other || is_manifest(basename(path));
}

// Collapses "./" and "a/../" segments.
std::string normalize_path(const std::string& path) {
    std::vector<std::string> parts;
    for (const auto& p : text::split(path, '/')) {
        if (p.empty() || p == ".") continue;
        if (p == "..") {
            if (!parts.empty()) parts.pop_back();
            continue;
        }
        parts.push_back(p);
    }
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "/") + p;
    return out;
}

std::string inflate_bytes(const unsigned char* data, std::size_t size, int window_bits, std::size_t expected = 0) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK) throw InputError("zlib initialisation failed");
    zs.next_in = const_cast<unsigned char*>(data);
    zs.avail_in = static_cast<uInt>(size);
    std::string out;
    out.reserve(expected ? expected : size * 4);
    char buffer[1 << 15];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buffer);
        zs.avail_out = sizeof buffer;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw InputError("corrupt compressed data");
        }
        out.append(buffer, sizeof buffer - zs.avail_out);
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) break;  // truncated input
    }
    inflateEnd(&zs);
    return out;
}

std::uint64_t parse_octal(const char* field, std::size_t len) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len && field[i]; ++i) {
        if (field[i] == ' ') continue;
        if (field[i] < '0' || field[i] > '7') break;
        v = v * 8 + static_cast<std::uint64_t>(field[i] - '0');
    }
    return v;
}

std::string cstr(const char* field, std::size_t len) {
    return std::string(field, strnlen(field, len));
}

std::vector<std::pair<std::string, std::string>> read_tar(const std::string& data) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string long_name;
    std::size_t pos = 0;
    while (pos + 512 <= data.size()) {
        const char* h = data.data() + pos;
        if (std::all_of(h, h + 512, [](char c) { return c == 0; })) break;
        const std::uint64_t size = parse_octal(h + 124, 12);
        const char type = h[156];
        std::string name = cstr(h, 100);
        if (std::memcmp(h + 257, "ustar", 5) == 0) {
            const std::string prefix = cstr(h + 345, 155);
            if (!prefix.empty()) name = prefix + "/" + name;
        }
        const std::size_t body = pos + 512;
        if (body + size > data.size()) throw InputError("truncated tar archive");
        const std::string content = data.substr(body, size);
        pos = body + ((size + 511) / 512) * 512;

        if (type == 'L') {
            long_name = cstr(content.data(), content.size());
            continue;
        }
        if (type == 'x') {
            // Records are "<len> key=value\n".
            for (const auto& rec : text::split_lines(content)) {
                const auto sp = rec.find(' ');
                if (sp == std::string::npos) continue;
                const std::string kv = rec.substr(sp + 1);
                if (kv.rfind("path=", 0) == 0) long_name = kv.substr(5);
            }
            continue;
        }
        if (!long_name.empty()) {
            name = long_name;
            long_name.clear();
        }
        if ((type == '0' || type == '\0' || type == '7') && wanted(name) && size <= kMaxMemberBytes) {
            out.emplace_back(name, content);
        }
    }
    return out;
}

std::uint32_t le32(const std::string& d, std::size_t at) {
    if (at + 4 > d.size()) throw InputError("truncated zip archive");
    return static_cast<std::uint32_t>(static_cast<unsigned char>(d[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(d[at + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(d[at + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(d[at + 3])) << 24;
}

std::uint16_t le16(const std::string& d, std::size_t at) {
    if (at + 2 > d.size()) throw InputError("truncated zip archive");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(d[at]) |
                                      static_cast<unsigned char>(d[at + 1]) << 8);
}

std::vector<std::pair<std::string, std::string>> read_zip(const std::string& d) {
    if (d.size() < 22) throw InputError("not a zip archive");
    std::size_t eocd = std::string::npos;
    const std::size_t lowest = d.size() > 22 + 65535 ? d.size() - 22 - 65535 : 0;
    for (std::size_t i = d.size() - 22 + 1; i-- > lowest;) {
        if (le32(d, i) == 0x06054b50u) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw InputError("zip end-of-directory record not found");
    const std::size_t count = le16(d, eocd + 10);
    std::size_t cd = le32(d, eocd + 16);
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t n = 0; n < count; ++n) {
        if (le32(d, cd) != 0x02014b50u) throw InputError("corrupt zip central directory");
        const std::uint16_t method = le16(d, cd + 10);
        const std::uint32_t csize = le32(d, cd + 20);
        const std::uint32_t usize = le32(d, cd + 24);
        const std::uint16_t nlen = le16(d, cd + 28);
        const std::uint16_t elen = le16(d, cd + 30);
        const std::uint16_t clen = le16(d, cd + 32);
        const std::uint32_t local = le32(d, cd + 42);
        if (cd + 46 + nlen > d.size()) throw InputError("corrupt zip central directory");
        const std::string name = d.substr(cd + 46, nlen);
        cd += 46 + nlen + elen + clen;
        if (name.empty() || name.back() == '/' || !wanted(name) || usize > kMaxMemberBytes) continue;
        if (le32(d, local) != 0x04034b50u) throw InputError("corrupt zip local header");
        const std::size_t start = local + 30 + le16(d, local + 26) + le16(d, local + 28);
        if (start + csize > d.size()) throw InputError("truncated zip member " + name);
        const auto* bytes = reinterpret_cast<const unsigned char*>(d.data() + start);
        if (method == 0) {
            out.emplace_back(name, d.substr(start, csize));
        } else if (method == 8) {
            out.emplace_back(name, inflate_bytes(bytes, csize, -MAX_WBITS, usize));
        } else {
            log::warn("package", "skipping " + name + ": unsupported zip method " + std::to_string(method));
        }
    }
    return out;
}

void strip_common_top(std::vector<std::pair<std::string, std::string>>& members) {
    if (members.empty()) return;
    std::string top;
    for (const auto& [path, _] : members) {
        const auto slash = path.find('/');
        if (slash == std::string::npos) return;
        const std::string first = path.substr(0, slash);
        if (top.empty()) top = first;
        if (first != top) return;
    }
    for (auto& [path, _] : members) path = path.substr(top.size() + 1);
}

std::vector<std::string> hooks_from_package_json(const std::string& dir, const std::string& content) {
    std::vector<std::string> hooks;
    const auto j = nlohmann::json::parse(content, nullptr, false);
    if (!j.is_object() || !j.contains("scripts") || !j["scripts"].is_object()) return hooks;
    static const std::regex script(R"((?:^|[\s;&|])(?:node|python3?)\s+([\w./-]+\.(?:js|cjs|mjs|py))\b)");
    for (const char* key : {"preinstall", "install", "postinstall", "prepare"}) {
        if (!j["scripts"].contains(key) || !j["scripts"][key].is_string()) continue;
        const std::string cmd = j["scripts"][key].get<std::string>();
        for (auto it = std::sregex_iterator(cmd.begin(), cmd.end(), script); it != std::sregex_iterator(); ++it) {
            hooks.push_back(normalize_path(dir.empty() ? (*it)[1].str() : dir + "/" + (*it)[1].str()));
        }
    }
    return hooks;
}

std::string id_from_manifests(const std::map<std::string, std::string>& manifests) {
    if (auto it = manifests.find("package.json"); it != manifests.end()) {
        const auto j = nlohmann::json::parse(it->second, nullptr, false);
        if (j.is_object() && j.contains("name") && j["name"].is_string()) {
            std::string id = j["name"].get<std::string>();
            if (j.contains("version") && j["version"].is_string()) id += "@" + j["version"].get<std::string>();
            return id;
        }
    }
    for (const char* meta : {"PKG-INFO", "METADATA"}) {
        if (auto it = manifests.find(meta); it != manifests.end()) {
            std::string name;
            std::string version;
            for (const auto& line : text::split_lines(it->second)) {
                if (line.rfind("Name:", 0) == 0) name = text::trim(line.substr(5));
                if (line.rfind("Version:", 0) == 0) version = text::trim(line.substr(8));
            }
            if (!name.empty()) return version.empty() ? name : name + "==" + version;
        }
    }
    for (const char* file : {"setup.py", "pyproject.toml"}) {
        if (auto it = manifests.find(file); it != manifests.end()) {
            static const std::regex name_re(R"(\bname\s*=\s*['"]([^'"]+)['"])");
            static const std::regex version_re(R"(\bversion\s*=\s*['"]([^'"]+)['"])");
            std::smatch m;
            if (std::regex_search(it->second, m, name_re)) {
                std::string id = m[1].str();
                if (std::regex_search(it->second, m, version_re)) id += "==" + m[1].str();
                return id;
            }
        }
    }
    return "";
}

}  // namespace

Language language_for_path(const std::string& path) {
    if (ends_with(path, ".py")) return Language::Python;
    if (ends_with(path, ".js") || ends_with(path, ".cjs") || ends_with(path, ".mjs")) return Language::JavaScript;
    return Language::Other;
}

PackageSource package_from_files(std::vector<std::pair<std::string, std::string>> members,
                                 const std::string& fallback_id) {
    PackageSource pkg;
    std::set<std::string> seen;
    std::map<std::string, std::string> root_manifests;
    std::set<std::string> hooks;
    for (auto& [raw_path, bytes] : members) {
        const std::string path = normalize_path(raw_path);
        if (path.empty()) continue;
        if (!seen.insert(path).second) throw InputError("duplicate package path: " + path);
        const std::string name = basename(path);
        if (name == "package.json") {
            // The outermost manifest names the package; every manifest may declare hooks.
            if (!root_manifests.count(name) || dirname(path).empty()) root_manifests[name] = bytes;
            for (auto& h : hooks_from_package_json(dirname(path), bytes)) hooks.insert(h);
        } else if (is_manifest(name) && dirname(path).find('/') == std::string::npos) {
            if (!root_manifests.count(name) || dirname(path).empty()) root_manifests[name] = bytes;
        }
        if (name == "setup.py") hooks.insert(path);
        const Language lang = language_for_path(path);
        if (lang != Language::Other) pkg.files.push_back({path, std::move(bytes), lang});
    }
    if (pkg.files.empty()) throw InputError("package " + fallback_id + " contains no Python or JavaScript source");
    std::sort(pkg.files.begin(), pkg.files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    for (const auto& h : hooks) {
        if (std::any_of(pkg.files.begin(), pkg.files.end(), [&](const auto& f) { return f.path == h; })) {
            pkg.install_hooks.push_back(h);
        }
    }
    pkg.package_id = id_from_manifests(root_manifests);
    if (pkg.package_id.empty()) pkg.package_id = fallback_id;
    return pkg;
}

std::vector<std::pair<std::string, std::string>> read_archive(const std::string& path) {
    const std::string raw = text::read_file(path);
    const bool gz = raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0x1f &&
                    static_cast<unsigned char>(raw[1]) == 0x8b;
    if (gz) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
        return read_tar(inflate_bytes(bytes, raw.size(), 16 + MAX_WBITS));
    }
    if (raw.size() >= 4 && raw.compare(0, 4, "PK\x03\x04") == 0) return read_zip(raw);
    if (raw.size() >= 262 && raw.compare(257, 5, "ustar") == 0) return read_tar(raw);
    throw InputError("unrecognised archive format: " + path);
}

PackageSource load_package(const std::string& path) {
    std::error_code ec;
    const fs::path p(path);
    if (!fs::exists(p, ec)) throw InputError("package path does not exist: " + path);

    std::string stem = p.filename().string();
    for (const char* ext : {".tar.gz", ".tgz", ".tar", ".zip", ".whl"}) {
        if (ends_with(stem, ext)) {
            stem = stem.substr(0, stem.size() - std::strlen(ext));
            break;
        }
    }
    if (stem.empty()) stem = p.parent_path().filename().string();

    std::vector<std::pair<std::string, std::string>> members;
    if (fs::is_directory(p, ec)) {
        fs::recursive_directory_iterator it(p, fs::directory_options::skip_permission_denied, ec), end;
        if (ec) throw InputError("cannot read package directory " + path + ": " + ec.message());
        for (; it != end; it.increment(ec)) {
            if (ec) throw InputError("cannot read package directory " + path + ": " + ec.message());
            const std::string name = it->path().filename().string();
            if (it->is_directory() && (name == "node_modules" || name == ".git" || name == "__pycache__")) {
                it.disable_recursion_pending();
                continue;
            }
            if (!it->is_regular_file()) continue;
            const std::string rel = fs::relative(it->path(), p).generic_string();
            if (!wanted(rel) || it->file_size() > kMaxMemberBytes) continue;
            members.emplace_back(rel, text::read_file(it->path().string()));
        }
    } else {
        members = read_archive(path);
        strip_common_top(members);
    }
    return package_from_files(std::move(members), stem);
}

}  // namespace intelguard
