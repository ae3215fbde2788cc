"""Wave-speed scanning and travelling-wave assembly."""
