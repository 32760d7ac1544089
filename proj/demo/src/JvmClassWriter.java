package demo;

import java.io.DataOutputStream;
import java.io.IOException;
import java.util.ArrayList;
import java.util.List;

/** Writes a minimal class file from an in-memory description. */
public class JvmClassWriter {
    private static final int MAGIC = 0xCAFEBABE;

    private final List<String> constants = new ArrayList<>();
    private final List<JvmField> fields = new ArrayList<>();
    private final List<JvmMethod> methods = new ArrayList<>();
    private final List<String> interfaces = new ArrayList<>();
    private String className = "Unnamed";
    private String superName = "java/lang/Object";
    private int access = 0x0021;

    public JvmClassWriter(String className) {
        this.className = className;
    }

    public void addField(JvmField field) {
        fields.add(field);
    }

    public void addMethod(JvmMethod method) {
        methods.add(method);
    }

    public void addInterface(String name) {
        interfaces.add(name);
    }

    private int constant(String value) {
        int index = constants.indexOf(value);
        if (index >= 0) {
            return index + 1;
        }
        constants.add(value);
        return constants.size();
    }

    private void writeAttributes(DataOutputStream out, List<String> attributes) throws IOException {
        out.writeShort(attributes.size());
        for (String attribute : attributes) {
            out.writeShort(constant(attribute));
            out.writeInt(0);
        }
    }

    public byte[] writeJvmClass(int version) throws IOException {
        if (version < 45) {
            throw new IOException("unsupported class file version " + version);
        }
        java.io.ByteArrayOutputStream bytes = new java.io.ByteArrayOutputStream();
        DataOutputStream out = new DataOutputStream(bytes);
        int thisIndex = constant(className);
        int superIndex = constant(superName);
        out.writeInt(MAGIC);
        out.writeShort(0);
        out.writeShort(version);
        out.writeShort(constants.size() + 1);
        for (String value : constants) {
            out.writeByte(1);
            out.writeUTF(value);
        }
        out.writeShort(access);
        out.writeShort(thisIndex);
        out.writeShort(superIndex);
        int interfaceCount = interfaces.size();
        out.writeShort(interfaceCount);
        for (String name : interfaces) {
            out.writeShort(constant(name));
        }
        out.writeShort(fields.size());
        for (JvmField field : fields) {
            out.writeShort(field.access());
            out.writeShort(constant(field.name()));
            out.writeShort(constant(field.descriptor()));
            writeAttributes(out, field.attributes());
        }
        out.writeShort(methods.size());
        for (JvmMethod method : methods) {
            out.writeShort(method.access());
            out.writeShort(constant(method.name()));
            out.writeShort(constant(method.descriptor()));
            writeAttributes(out, method.attributes());
        }
        out.writeShort(0);
        out.flush();
        return bytes.toByteArray();
    }

    public record JvmField(int access, String name, String descriptor, List<String> attributes) {
    }

    public record JvmMethod(int access, String name, String descriptor, List<String> attributes) {
    }
}
