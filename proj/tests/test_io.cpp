#include <gtest/gtest.h>

#include <photonic/io.hpp>

#include "test_support.hpp"

using namespace photonic;

namespace {

std::string data(const std::string& name) { return std::string(PHOTONIC_DATA_DIR) + "/" + name; }

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const input_error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Fixtures, PrintedU5) {
    const cmatrix U = io::read_matrix(data("u5_printed.json"));
    ASSERT_EQ(U.rows(), 5);
    ASSERT_EQ(U.cols(), 5);
    EXPECT_EQ(U(0, 4), complex(0.0));
    EXPECT_EQ(U(0, 1), complex(0.07239, 0.8203));
    EXPECT_EQ(U(3, 2), complex(-0.1392, 0.0839));
    EXPECT_EQ(U(4, 4), complex(0.4123, -0.1121));
    // column 3 of the printed matrix is not normalized
    EXPECT_GT(unitarity_error(U), 0.2);

    const cmatrix C = io::read_matrix(data("u5_corrected.json"));
    EXPECT_LT(unitarity_error(C), 1e-3);
    EXPECT_EQ((U - C).cwiseAbs().maxCoeff(), std::abs(complex(0.0, 0.3599 - 0.0839)));
    for (int c : {0, 1, 3}) EXPECT_EQ(U.col(c), C.col(c));
}

TEST(Fixtures, ChipMesh) {
    const auto chip = io::read_mesh(data("mesh_chip.json"));
    EXPECT_EQ(chip.m, 5);
    EXPECT_EQ(chip.parameter_count(), 19);
    const auto kinds = chip.is_splitter();
    EXPECT_EQ(std::count(kinds.begin(), kinds.end(), true), 8);
    EXPECT_EQ(std::abs(mesh_to_unitary(chip)(0, 4)), 0.0);
    const auto truth = io::read_mesh(data("synthetic/mesh_true.json"));
    EXPECT_EQ(truth.parameter_count(), 19);
    EXPECT_EQ(predicted_visibilities(mesh_to_unitary(truth)).size(), 84u);
    EXPECT_EQ(io::read_visibilities(data("synthetic/visibilities.csv")).size(), 84u);
}

TEST(Json, UnitaryRoundTrip) {
    std::mt19937_64 rng(51);
    const cmatrix U = testsupport::random_unitary(rng, 4);
    const auto text = io::unitary_to_json(U).dump();
    EXPECT_EQ(io::unitary_from_json(io::parse_json(text, "t")), U);
    EXPECT_EQ(io::unitary_from_json(io::parse_json("[[1, 0], [0, 1]]", "t")), cmatrix::Identity(2, 2));
    EXPECT_THROW(io::unitary_from_json(io::parse_json("[[1, 0], [0]]", "t")), input_error);
    EXPECT_THROW(io::unitary_from_json(io::parse_json("[[1, \"x\"], [0, 1]]", "t")), input_error);
    EXPECT_THROW(io::parse_json("[[1, 0", "t"), input_error);
    EXPECT_THROW(io::read_matrix(data("missing.json")), input_error);
}

TEST(Json, MeshRoundTrip) {
    const auto mesh = io::read_mesh(data("synthetic/mesh_true.json"));
    const auto again = io::mesh_from_json(io::parse_json(io::mesh_to_json(mesh).dump(), "t"));
    EXPECT_EQ(again.parameters(), mesh.parameters());
    EXPECT_EQ(mesh_to_unitary(again), mesh_to_unitary(mesh));
    const std::string bad = R"({"m": 2, "elements": [{"type": "bs", "a": 1, "b": 3, "beta": 1.0}]})";
    EXPECT_THROW(io::mesh_from_json(io::parse_json(bad, "t")), input_error);
    const std::string unknown = R"({"m": 2, "elements": [{"type": "mirror"}]})";
    EXPECT_NE(error_of([&] { io::mesh_from_json(io::parse_json(unknown, "t")); }).find("element 1"), std::string::npos);
}

TEST(Csv, VisibilitiesRoundTrip) {
    std::mt19937_64 rng(52);
    const auto vis = predicted_visibilities(testsupport::random_unitary(rng, 4), 0.025);
    const auto back = io::parse_visibilities(io::visibilities_to_csv(vis), "t");
    ASSERT_EQ(back.size(), vis.size());
    for (std::size_t q = 0; q < vis.size(); ++q) {
        EXPECT_EQ(back[q].value, vis[q].value);
        EXPECT_EQ(back[q].sigma, vis[q].sigma);
        EXPECT_EQ(back[q].l, vis[q].l);
    }
}

TEST(Csv, CorruptRowsReportLineNumbers) {
    const std::string text = "i,j,k,l,V,sigma\n1,2,1,2,0.5,0.02\n1,3,1,2,abc,0.02\n";
    EXPECT_NE(error_of([&] { io::parse_visibilities(text, "v.csv"); }).find("row 3"), std::string::npos);
    const std::string short_row = "i,j,k,l,V,sigma\n1,2,1,2,0.5\n";
    EXPECT_NE(error_of([&] { io::parse_visibilities(short_row, "v.csv"); }).find("row 2"), std::string::npos);
    const std::string bad_pair = "i,j,k,l,V,sigma\n2,1,1,2,0.5,0.02\n";
    EXPECT_THROW(io::parse_visibilities(bad_pair, "v.csv"), input_error);
    EXPECT_THROW(io::parse_visibilities("i,j,k,l,V\n", "v.csv"), input_error);
}

TEST(Csv, ScanRoundTrip) {
    const auto scan = io::read_scan(data("synthetic/scans/scan_12_12.csv"));
    EXPECT_EQ(scan.samples.size(), 31u);
    EXPECT_EQ(scan.ho1, 3.0);
    EXPECT_NEAR(io::photon_wavelength_nm(scan.photon2), 788.60, 1e-10);
    EXPECT_NEAR(io::photon_fwhm_nm(scan.photon1), 2.9, 1e-10);
    const auto back = io::parse_scan(io::scan_to_csv(scan), "t");
    EXPECT_EQ(back.samples.size(), scan.samples.size());
    EXPECT_EQ(back.samples[7].counts, scan.samples[7].counts);
    EXPECT_NEAR(back.photon1.omega_c, scan.photon1.omega_c, 1e-14);
    EXPECT_EQ(fit_dip(back).visibility, fit_dip(io::parse_scan(io::scan_to_csv(back), "t")).visibility);

    EXPECT_THROW(io::parse_scan("delay_fs,counts,error\n0,1,1\n", "t"), input_error);
    std::string text = io::scan_to_csv(scan);
    text += "12,-4,1\n";
    EXPECT_NE(error_of([&] { io::parse_scan(text, "s.csv"); }).find("row 44"), std::string::npos);
}

TEST(Format, Numbers) {
    EXPECT_EQ(io::format_complex(complex(1.0, 0.0)), "1+0i");
    EXPECT_EQ(io::format_complex(complex(-0.5, -0.25)), "-0.5-0.25i");
    EXPECT_EQ(io::format_complex(complex(1.0 / 3.0, 2.0)), "0.333333333333+2i");
    EXPECT_EQ(io::format_fixed(3.14159, 2), "3.14");
    EXPECT_EQ(io::parse_number(io::format_double(0.1 + 0.2), "t"), 0.1 + 0.2);
}
