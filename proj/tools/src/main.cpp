#include "cw_app/commands.hpp"

int main(int argc, char** argv) { return cw::app::run_cli(argc, argv); }
