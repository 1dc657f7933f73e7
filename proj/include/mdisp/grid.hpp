#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdisp {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

/// Interior face between two cells. The unit normal points from `left`
/// to `right`; boundary faces are not stored (no-flow boundary).
struct Face {
    int left = -1;
    int right = -1;
    Vec2 normal;
    double area = 0.0;    // face length in 2D
    Vec2 center;
    double dist = 0.0;    // distance between the two cell centers
};

/// Uniform cell-centered rectangular grid on [0,Lx] x [0,Ly].
/// Cells are indexed row-major: cell(i,j) = j*nx + i. Immutable after
/// construction.
struct Grid {
    int nx = 0;
    int ny = 0;
    double Lx = 0.0;
    double Ly = 0.0;
    std::vector<Face> faces;
    // Per-cell face ids in order {west, east, south, north}; -1 on the
    // no-flow boundary.
    std::vector<std::array<int, 4>> cell_faces;

    int num_cells() const { return nx * ny; }
    int num_faces() const { return static_cast<int>(faces.size()); }
    double hx() const { return Lx / nx; }
    double hy() const { return Ly / ny; }
    double cell_volume() const { return hx() * hy(); }
    double cell_diagonal() const { return std::hypot(hx(), hy()); }

    int cell_index(int i, int j) const { return j * nx + i; }
    int cell_i(int cell) const { return cell % nx; }
    int cell_j(int cell) const { return cell / nx; }

    Vec2 cell_center(int cell) const
    {
        return {(cell_i(cell) + 0.5) * hx(), (cell_j(cell) + 0.5) * hy()};
    }
};

inline Grid build_grid(int nx, int ny, double Lx, double Ly)
{
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_grid: cell counts must be >= 1");
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw std::invalid_argument("build_grid: domain lengths must be > 0");

    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.Lx = Lx;
    g.Ly = Ly;

    const double hx = g.hx(), hy = g.hy();
    g.faces.reserve(static_cast<size_t>((nx - 1) * ny + nx * (ny - 1)));

    // x-oriented faces first, ordered by (j, i).
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            Face f;
            f.left = g.cell_index(i, j);
            f.right = g.cell_index(i + 1, j);
            f.normal = {1.0, 0.0};
            f.area = hy;
            f.center = {(i + 1) * hx, (j + 0.5) * hy};
            f.dist = hx;
            g.faces.push_back(f);
        }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Face f;
            f.left = g.cell_index(i, j);
            f.right = g.cell_index(i, j + 1);
            f.normal = {0.0, 1.0};
            f.area = hx;
            f.center = {(i + 0.5) * hx, (j + 1) * hy};
            f.dist = hy;
            g.faces.push_back(f);
        }

    const int nxf = (nx - 1) * ny;
    g.cell_faces.assign(static_cast<size_t>(g.num_cells()), {-1, -1, -1, -1});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            auto& cf = g.cell_faces[static_cast<size_t>(g.cell_index(i, j))];
            if (i > 0) cf[0] = j * (nx - 1) + (i - 1);
            if (i + 1 < nx) cf[1] = j * (nx - 1) + i;
            if (j > 0) cf[2] = nxf + (j - 1) * nx + i;
            if (j + 1 < ny) cf[3] = nxf + j * nx + i;
        }
    return g;
}

/// Index of the cell whose closed box contains p. Points on internal
/// edges resolve to the cell with the larger index.
inline int locate_cell(const Grid& g, Vec2 p)
{
    if (p.x < 0.0 || p.x > g.Lx || p.y < 0.0 || p.y > g.Ly)
        throw std::invalid_argument("locate_cell: point outside domain");
    int i = static_cast<int>(std::floor(p.x * g.nx / g.Lx));
    int j = static_cast<int>(std::floor(p.y * g.ny / g.Ly));
    if (i >= g.nx) i = g.nx - 1;
    if (j >= g.ny) j = g.ny - 1;
    return g.cell_index(i, j);
}

struct ScalarField {
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(int n, double fill = 0.0)
        : v(static_cast<size_t>(n), fill)
    {
    }

    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

struct VectorField {
    std::vector<Vec2> v;

    VectorField() = default;
    explicit VectorField(int n) : v(static_cast<size_t>(n)) {}

    int size() const { return static_cast<int>(v.size()); }
    Vec2& operator[](int i) { return v[static_cast<size_t>(i)]; }
    const Vec2& operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

struct FaceField {
    std::vector<double> v;

    FaceField() = default;
    explicit FaceField(int n, double fill = 0.0)
        : v(static_cast<size_t>(n), fill)
    {
    }

    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

inline ScalarField make_cell_field(const Grid& g, double fill = 0.0)
{
    return ScalarField(g.num_cells(), fill);
}

inline FaceField make_face_field(const Grid& g, double fill = 0.0)
{
    return FaceField(g.num_faces(), fill);
}

inline bool all_finite(const std::vector<double>& v)
{
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Speed (|u|) field of a cell velocity field.
inline ScalarField speed_field(const VectorField& u)
{
    ScalarField s(u.size());
    for (int i = 0; i < u.size(); ++i) s[i] = u[i].norm();
    return s;
}

}  // namespace mdisp
