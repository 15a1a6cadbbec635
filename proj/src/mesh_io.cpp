#include "toothsim/mesh.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace toothsim {

Aabb TriangleMesh::bounds() const {
    Aabb b;
    for (const Vec3& v : vertices) {
        b.expand(v);
    }
    return b;
}

MeshTopology analyzeTopology(const TriangleMesh& mesh) {
    MeshTopology topo;
    topo.vertices = mesh.vertices.size();
    topo.faces = mesh.triangles.size();
    std::unordered_map<std::uint64_t, std::uint32_t> edgeUse;
    edgeUse.reserve(mesh.triangles.size() * 2);
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t a = t[e];
            const std::uint32_t b = t[(e + 1) % 3];
            if (a >= topo.vertices || b >= topo.vertices) {
                topo.indicesInRange = false;
                continue;
            }
            const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
            ++edgeUse[key];
        }
    }
    topo.edges = edgeUse.size();
    for (const auto& [key, n] : edgeUse) {
        if (n == 1) {
            ++topo.boundaryEdges;
        } else if (n > 2) {
            ++topo.nonManifoldEdges;
        }
    }
    return topo;
}

namespace {

void tissueColour(std::uint8_t tissue, int rgb[3]) {
    switch (tissue) {
    case 0: rgb[0] = 240; rgb[1] = 240; rgb[2] = 230; return;  // enamel
    case 1: rgb[0] = 230; rgb[1] = 200; rgb[2] = 140; return;  // dentin
    case 2: rgb[0] = 200; rgb[1] = 60; rgb[2] = 60; return;    // pulp
    default: rgb[0] = 128; rgb[1] = 128; rgb[2] = 128; return;
    }
}

void appendNumber(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

} // namespace

std::string serializePly(const TriangleMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 80 + mesh.triangles.size() * 24 + 256);
    out += "ply\nformat ascii 1.0\ncomment toothsim marching cubes mesh (mm)\n";
    out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property float nx\nproperty float ny\nproperty float nz\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Vec3& p = mesh.vertices[v];
        const Vec3 n = v < mesh.normals.size() ? mesh.normals[v] : Vec3{};
        int rgb[3];
        tissueColour(v < mesh.tissues.size() ? mesh.tissues[v] : kNoTissue, rgb);
        appendNumber(out, p.x); out += ' ';
        appendNumber(out, p.y); out += ' ';
        appendNumber(out, p.z); out += ' ';
        appendNumber(out, n.x); out += ' ';
        appendNumber(out, n.y); out += ' ';
        appendNumber(out, n.z);
        out += ' ' + std::to_string(rgb[0]) + ' ' + std::to_string(rgb[1]) + ' ' + std::to_string(rgb[2]) + '\n';
    }
    for (const auto& t : mesh.triangles) {
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    }
    return out;
}

void savePly(const TriangleMesh& mesh, const std::filesystem::path& path) {
    detail::writeFile(path, serializePly(mesh));
}

TriangleMesh parsePly(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    auto fail = [&](const std::string& msg) { throw Error("ply line " + std::to_string(lineNo) + ": " + msg); };

    std::getline(in, line);
    ++lineNo;
    if (line != "ply") fail("missing 'ply' magic");
    std::size_t nv = 0, nf = 0;
    std::vector<std::string> vertexProps;
    std::string current;
    while (std::getline(in, line)) {
        ++lineNo;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") fail("only ascii PLY is supported");
        } else if (word == "element") {
            ls >> current;
            std::size_t n = 0;
            ls >> n;
            if (current == "vertex") nv = n;
            else if (current == "face") nf = n;
        } else if (word == "property" && current == "vertex") {
            std::string type, name;
            ls >> type >> name;
            vertexProps.push_back(name);
        } else if (word == "end_header") {
            break;
        }
    }
    auto col = [&](const std::string& name) -> int {
        const auto it = std::find(vertexProps.begin(), vertexProps.end(), name);
        return it == vertexProps.end() ? -1 : static_cast<int>(it - vertexProps.begin());
    };
    const int cx = col("x"), cy = col("y"), cz = col("z");
    const int cnx = col("nx"), cny = col("ny"), cnz = col("nz");
    if (cx < 0 || cy < 0 || cz < 0) fail("vertex element lacks x/y/z");

    TriangleMesh mesh;
    mesh.vertices.reserve(nv);
    std::vector<double> vals(vertexProps.size());
    for (std::size_t v = 0; v < nv; ++v) {
        if (!std::getline(in, line)) fail("unexpected end of vertex list");
        ++lineNo;
        std::istringstream ls(line);
        for (auto& x : vals) {
            if (!(ls >> x)) fail("malformed vertex");
        }
        mesh.vertices.push_back({vals[cx], vals[cy], vals[cz]});
        if (cnx >= 0 && cny >= 0 && cnz >= 0) {
            mesh.normals.push_back({vals[cnx], vals[cny], vals[cnz]});
        }
        mesh.tissues.push_back(kNoTissue);
    }
    for (std::size_t f = 0; f < nf; ++f) {
        if (!std::getline(in, line)) fail("unexpected end of face list");
        ++lineNo;
        std::istringstream ls(line);
        int count = 0;
        std::array<long long, 3> idx{};
        if (!(ls >> count) || count != 3 || !(ls >> idx[0] >> idx[1] >> idx[2])) fail("only triangles are supported");
        for (auto i : idx) {
            if (i < 0 || static_cast<std::size_t>(i) >= nv) fail("face index out of range");
        }
        mesh.triangles.push_back({static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[1]),
                                  static_cast<std::uint32_t>(idx[2])});
    }
    return mesh;
}

TriangleMesh loadPly(const std::filesystem::path& path) {
    try {
        return parsePly(detail::readFile(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

} // namespace toothsim
