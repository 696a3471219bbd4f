#!/usr/bin/env python3
"""Configuration checker for linear_pantograph."""
import sys
import os
sys.path.insert(0, 'src')

def check_config():
    """Load the settings and print the effective numerical knobs."""
    print("🔍 Checking configuration...\n")

    if not os.path.exists('.env'):
        print("ℹ️  No .env file: defaults are used (see .env.example)")
    else:
        print("✓ .env file exists")

    try:
        from linear_pantograph.config import get_settings
        settings = get_settings()
        print("✓ Settings loaded successfully")

        checks = [
            ('Series tolerance', settings.rel_tol, lambda v: 0 < v < 1e-6),
            ('Refine tolerance', settings.refine_tol, lambda v: 0 < v < 1e-6),
            ('Quadrature tolerance', settings.quad_tol, lambda v: 0 < v < 1e-6),
            ('Zero gate', settings.zero_gate_abs, lambda v: 0 < v < 1e-3),
            ('Rank band', settings.rank_band, lambda v: v >= 1),
        ]

        print("\n📋 Configuration values:")
        for name, value, validator in checks:
            if validator(value):
                print(f"  ✓ {name}: {value}")
            else:
                print(f"  ⚠️  {name}: {value} looks too loose")

        print(f"\n⚙️  Other settings:")
        for field in type(settings).model_fields:
            if field not in ('rel_tol', 'refine_tol', 'quad_tol', 'zero_gate_abs', 'rank_band'):
                print(f"  - {field}: {getattr(settings, field)}")

        from linear_pantograph.core_special import eval
        e = eval('E', 1.0, 1.0)
        print(f"\n🧪 E_1(1) = {e.value!r} (error estimate {e.abs_error_estimate:.2e})")
        return True

    except Exception as e:
        print(f"❌ Error loading settings: {e}")
        return False

if __name__ == '__main__':
    success = check_config()
    print("\n" + ("="*50))
    if success:
        print("✅ Configuration looks good! You can now run:")
        print("   ./pantograph.sh check --suite degeneration")
    else:
        print("❌ Please fix configuration issues above")
    sys.exit(0 if success else 1)
